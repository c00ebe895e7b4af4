"""Schwarzian-type derivatives, conformal metric invariants and univalence criteria."""
from .errors import (BranchCutError, CriticalPointError, DomainError, IndeterminateError,
                     JetError, NormError, ParseError, SchwarzError)
from .expr import eval_jet, parse, serialize
from .jets import Jet1, Jet2, jet_arith, jet_compose, pole_normalize, wirtinger_d
from .metric import (EUCLIDEAN, HYPERBOLIC, SPHERICAL, Metric, curvature, lambda_cov,
                     log_deriv, theta, theta_n)
from .mobius import Mobius, mobius_apply, mobius_disk_auto
from .polynomials import WeightedPoly, gen_P, gen_T, poly_eval
from .schwarzian import (Function, aharonov_psi, classical_S, identity_check, invariant_sigma,
                         peschl_minda_D, peschl_minda_Q, projective_D, projective_V, tamanoi_S)

__version__ = "0.1.0"

__all__ = [
    "BranchCutError", "CriticalPointError", "DomainError", "IndeterminateError", "JetError",
    "NormError", "ParseError", "SchwarzError", "eval_jet", "parse", "serialize", "Jet1", "Jet2",
    "jet_arith", "jet_compose", "pole_normalize", "wirtinger_d", "EUCLIDEAN", "HYPERBOLIC",
    "SPHERICAL", "Metric", "curvature", "lambda_cov", "log_deriv", "theta", "theta_n", "Mobius",
    "mobius_apply", "mobius_disk_auto", "WeightedPoly", "gen_P", "gen_T", "poly_eval",
    "Function", "aharonov_psi", "classical_S", "identity_check", "invariant_sigma",
    "peschl_minda_D", "peschl_minda_Q", "projective_D", "projective_V", "tamanoi_S",
]
