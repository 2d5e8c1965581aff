"""Certification and simulation of networks of parameter-mismatched oscillators."""
from .certification import (
    CertificateReport,
    check_decentralized,
    check_distributed,
    check_open_loop,
    epsilon_bound,
    greedy_pin_selection,
    lambda_star,
    mu_threshold,
)
from .control import ControllerSpec
from .dynamics import LorenzModel, MismatchEnsemble, QuadBound, UncertaintyBound, make_model, sample_mismatches
from .errors import CertificateFailedError, DivergenceError, NetsyncError, ValidationError
from .graph import GainDiagonal, UndirectedLaplacian, build_complete_R, build_path_laplacian
from .scenario import Scenario, build, load, preset
from .sim import IntegrationConfig, NetworkSystem, Trajectory, integrate

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "check_decentralized",
    "check_distributed",
    "check_open_loop",
    "epsilon_bound",
    "greedy_pin_selection",
    "lambda_star",
    "mu_threshold",
    "ControllerSpec",
    "LorenzModel",
    "MismatchEnsemble",
    "QuadBound",
    "UncertaintyBound",
    "make_model",
    "sample_mismatches",
    "CertificateFailedError",
    "DivergenceError",
    "NetsyncError",
    "ValidationError",
    "GainDiagonal",
    "UndirectedLaplacian",
    "build_complete_R",
    "build_path_laplacian",
    "Scenario",
    "build",
    "load",
    "preset",
    "IntegrationConfig",
    "NetworkSystem",
    "Trajectory",
    "integrate",
]
