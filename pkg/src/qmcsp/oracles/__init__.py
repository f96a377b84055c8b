"""Exact brute-force oracles for MQCSP, UMCSP, SMCSP and MQCSP*."""

from .cache import OracleCache, make_key, object_digest
from .decide import (
    STAR_ALPHA,
    TOL,
    ComplexityCertificate,
    OracleVerdict,
    PromiseThresholds,
    decide_mqcsp,
    decide_mqcsp_star,
    decide_smcsp,
    decide_umcsp,
    dependency_set,
    function_engine,
    min_size,
)
from .engine import DEFAULT_BUDGET, Pruning, ReachableSet, clear_engine_cache, get_engine
from .enumerate import count_circuits, enumerate_circuits

__all__ = [name for name in dir() if not name.startswith("_")]
