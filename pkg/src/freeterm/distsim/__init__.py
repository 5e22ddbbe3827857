"""Simulation of coordination-free distributed query evaluation by flooding."""

from .checks import (
    CfVerdict,
    TupleVerdict,
    check_cf_correct,
    check_domain_distinct_monotone,
    load_policy,
    negative_complement,
    per_tuple_ready_run,
    run_policy_aware,
    run_with_all_metadata,
)
from .engine import Configuration, RunSchedule, RunTrace, random_partitioning, run
from .network import InvalidNetwork, Network
from .policies import ALL, FtReadyPolicy, PerTuplePolicy, ReadyPolicy, SignedReadyPolicy, ft_ready_policy

__all__ = [
    "ALL", "CfVerdict", "Configuration", "FtReadyPolicy", "InvalidNetwork", "Network", "PerTuplePolicy",
    "ReadyPolicy", "RunSchedule", "RunTrace", "SignedReadyPolicy", "TupleVerdict", "check_cf_correct",
    "check_domain_distinct_monotone", "ft_ready_policy", "load_policy", "negative_complement",
    "per_tuple_ready_run", "random_partitioning", "run", "run_policy_aware", "run_with_all_metadata",
]
