"""Kicked Ising chain OTOC toolkit."""
from .floquet import FloquetMap, build_floquet
from .hilbert import SpinChainSpec
from .otoc import (
    ObservablePair,
    OtocSeries,
    otoc_block,
    otoc_random_observables,
    otoc_single_site,
)

__all__ = [
    "FloquetMap",
    "ObservablePair",
    "OtocSeries",
    "SpinChainSpec",
    "build_floquet",
    "otoc_block",
    "otoc_random_observables",
    "otoc_single_site",
]
