"""Random walks on SL(m, Z) and Sp(2g, Z) and Galois groups of their
characteristic polynomials, certified through Frobenius classes."""

from ._jit import JIT_ENABLED
from .algebra import charpoly_exact, charpoly_mod, discriminant, factor_mod, reciprocal, squarefree_mod
from .census import CensusReport, run_census
from .chain import ChainSpec, kernel_from_walk, lezaud_bound, sieve_density, simulate_iota, spectral_gap
from .frobenius import FrobeniusObservation, classify, classify_modular, theta_type_a, theta_type_c
from .harness import estimate_tau, galois_certify, nonreg_decay, survey, torus_demo
from .walker import ConfigError, GroupSpec, InvariantError, WalkConfig, default_generators, run_walk
from .weyl import TypeA, TypeC, enumerate_classes, jordan_certificate

__version__ = "0.1.0"
