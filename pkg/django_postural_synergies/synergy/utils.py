from enum import Enum

N_AUTO = "auto"


class PerSynergyVaf(str, Enum):
    RANK1 = "rank1"
    INCREMENTAL = "incremental"


class Pooling(str, Enum):
    POOLED = "pooled"
    PER_SUBJECT = "per_subject"
