"""Shared default configuration values."""

# Alias (lowercased) to canonical agent group.
DEFAULT_ALIAS_GROUPS: dict[str, str] = {
    "tenant": "Tenant-group",
    "subtenant": "Tenant-group",
    "lessee": "Tenant-group",
    "sublessee": "Tenant-group",
    "renter": "Tenant-group",
    "landlord": "Landlord-group",
    "sublandlord": "Landlord-group",
    "lessor": "Landlord-group",
    "sublessor": "Landlord-group",
    "owner": "Landlord-group",
}

# Closed list defining what counts as a modal auxiliary in statistics.
MODAL_AUXILIARIES: tuple[str, ...] = (
    "shall",
    "will",
    "may",
    "must",
    "can",
    "could",
    "should",
    "would",
    "might",
    "ought",
    "cannot",
)

# Cue phrases marking definitional provisions.
DEFINITION_CUES: tuple[str, ...] = (
    "shall mean",
    "means",
    "shall have the meaning",
    "has the meaning",
)

# Minimum parenthetical-mention count for an alias to be kept.
ALIAS_FREQUENCY_THRESHOLD = 2


def group_of(alias: str, alias_groups: dict[str, str] | None = None) -> str:
    """Canonical group for an alias; unmapped aliases form their own
    single-member group."""
    table = DEFAULT_ALIAS_GROUPS if alias_groups is None else alias_groups
    return table.get(alias.lower(), alias.lower())


def group_marker(group: str) -> str:
    """Reserved conditioning token for a canonical group,
    e.g. Tenant-group -> [TENANT]."""
    name = group.upper()
    if name.endswith("-GROUP"):
        name = name[: -len("-GROUP")]
    return f"[{name}]"
