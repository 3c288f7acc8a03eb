"""Aliquot sequence batch computation: iterate s(n) = sigma(n) - n over
ranges of starting values, classify every sequence as terminating, cyclic,
or open at a digit bound, and track mergers and cycles along the way.
"""

from .arithmetic import (
    DEFAULT_BUDGET,
    FactorBudget,
    FactorFailure,
    Factorization,
    InvalidInput,
    OversizeInput,
    aliquot_brute,
    aliquot_step,
    factorize,
    find_driver,
    is_prime,
    sigma,
)
from .campaign import CampaignConfig, RunArchive, resume, run_campaign
from .cycles import CycleCatalog, CycleRecord, canonicalize, verify_cycle
from .engine import (
    EngineConfig,
    SequenceRecord,
    classify_at,
    compute_metrics,
    detect_cycle,
    parity_profile,
    run_sequence,
)
from .mergers import MainDesignation, MergerBookkeeper, MergerEvent, ValueIndex

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BUDGET",
    "FactorBudget",
    "FactorFailure",
    "Factorization",
    "InvalidInput",
    "OversizeInput",
    "aliquot_brute",
    "aliquot_step",
    "factorize",
    "find_driver",
    "is_prime",
    "sigma",
    "CampaignConfig",
    "RunArchive",
    "resume",
    "run_campaign",
    "CycleCatalog",
    "CycleRecord",
    "canonicalize",
    "verify_cycle",
    "EngineConfig",
    "SequenceRecord",
    "classify_at",
    "compute_metrics",
    "detect_cycle",
    "parity_profile",
    "run_sequence",
    "MainDesignation",
    "MergerBookkeeper",
    "MergerEvent",
    "ValueIndex",
    "__version__",
]
