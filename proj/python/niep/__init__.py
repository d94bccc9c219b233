"""Nonnegative inverse eigenvalue toolkit.

Thin wrappers over the native module; structured results come back as dicts.
"""

import json

from ._niep import (
    ConstraintViolation,
    Error,
    InvalidInput,
    __version__,
    char_coeffs,
    eigenvalues,
    elementary_coeffs,
    power_sums,
    run_cli,
    sorted_spectrum,
)
from . import _niep

DEFAULT_SEED = 20240101


def check_necessary(spectrum, moments=4):
    return json.loads(_niep.check_json(list(spectrum), moments))


def partition_prover(spectrum):
    return json.loads(_niep.partition_prover_json(list(spectrum)))


def companion_realizer(spectrum):
    return json.loads(_niep.companion_json(list(spectrum)))


def realize(spectrum, symmetric=False, seed=DEFAULT_SEED, restarts=64, max_iters=2000):
    return json.loads(_niep.realize_json(list(spectrum), symmetric, seed, restarts, max_iters))


def verify_certificate(cert, tol=1e-8):
    text = cert if isinstance(cert, str) else json.dumps(cert)
    return _niep.verify_certificate_json(text, tol)


def perturb(cert, eps):
    text = cert if isinstance(cert, str) else json.dumps(cert)
    return json.loads(_niep.perturb_json(text, list(eps)))


def estimate_g(tail, resolution=0.01, symmetric=False, seed=DEFAULT_SEED, restarts=64, max_iters=2000):
    return json.loads(_niep.estimate_json(list(tail), symmetric, resolution, seed, restarts, max_iters))


def objective(kind, params, spectrum):
    """(value, gradient) of the coefficient or conjugation objective."""
    return _niep.objective(kind, list(params), list(spectrum))
