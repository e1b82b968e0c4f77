"""Turn raw contract HTML into per-agent deontic modality analyses.

Subpackages cover the pipeline stages: ingest (HTML to sentences),
lingrep (parse interchange), rules (trigger lexicon and dependency
rule engine), corpus (annotation management), evaluation (metrics),
and cli (stage-per-command pipeline).
"""

__version__ = "0.1.0"
