"""Parametric copula families.

``parse_model`` understands the ``family=<name>,dim=<d>,key=value`` model
strings used by the command line and config files, for example
``family=gaussian,rho=0.5`` or ``family=gaussian,dim=3,corr=R.txt``.
"""

from __future__ import annotations

from .archimedean import (
    ArchimedeanCopula,
    ClaytonGenerator,
    FrankGenerator,
    Generator,
    GumbelGenerator,
    clayton,
    frank,
    gumbel,
)
from .base import Capabilities, Copula, TailDependence, UnsupportedOperation
from .extreme_value import (
    ExtremeValueCopula,
    LogisticPickands,
    PickandsFunction,
    logistic,
    tail_dependence_function,
)
from .gaussian import GaussianCopula, bivariate_normal_copula_cdf, correlation_matrix, load_correlation
from .simple import CheckerboardCopula, FrechetLowerCopula, FrechetUpperCopula, IndependenceCopula

FAMILIES = (
    "independence",
    "gaussian",
    "clayton",
    "gumbel",
    "frank",
    "logistic",
    "frechet_upper",
    "frechet_lower",
    "checkerboard",
)


def parse_model_spec(text: str) -> dict:
    """Split ``"family=clayton, theta=1"`` into a dict of strings."""
    out = {}
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"model spec entry {part!r} is not key=value")
        key, value = part.split("=", 1)
        out[key.strip().lower()] = value.strip()
    if "family" not in out:
        raise ValueError("model spec needs family=<name>")
    return out


def parse_model(text: str) -> Copula:
    """Build a copula from a model spec string."""
    spec = parse_model_spec(text)
    family = spec.pop("family").lower()
    dim_given = "dim" in spec
    dim = int(spec.pop("dim", 2))

    def need(key):
        if key not in spec:
            raise ValueError(f"family {family!r} needs {key}=...")
        return float(spec.pop(key))

    if family == "independence":
        model = IndependenceCopula(dim)
    elif family == "gaussian":
        if "corr" in spec:
            model = GaussianCopula(corr=load_correlation(spec.pop("corr")))
            if dim_given and model.dim != dim:
                raise ValueError(f"dim={dim} disagrees with the {model.dim}x{model.dim} matrix")
        else:
            model = GaussianCopula(rho=need("rho"), dim=dim)
    elif family == "clayton":
        model = clayton(need("theta"), dim)
    elif family == "gumbel":
        model = gumbel(need("theta"), dim)
    elif family == "frank":
        model = frank(need("theta"), dim)
    elif family in ("logistic", "extreme_value"):
        if dim != 2:
            raise ValueError("extreme-value models are bivariate")
        model = logistic(need("theta"))
    elif family == "frechet_upper":
        model = FrechetUpperCopula(dim)
    elif family == "frechet_lower":
        model = FrechetLowerCopula(dim)
    elif family == "checkerboard":
        model = CheckerboardCopula(dim)
    else:
        raise ValueError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    if spec:
        raise ValueError(f"unused model parameters: {sorted(spec)}")
    return model


__all__ = [
    "ArchimedeanCopula",
    "Capabilities",
    "CheckerboardCopula",
    "ClaytonGenerator",
    "Copula",
    "ExtremeValueCopula",
    "FAMILIES",
    "FrankGenerator",
    "FrechetLowerCopula",
    "FrechetUpperCopula",
    "GaussianCopula",
    "Generator",
    "GumbelGenerator",
    "IndependenceCopula",
    "LogisticPickands",
    "PickandsFunction",
    "TailDependence",
    "UnsupportedOperation",
    "bivariate_normal_copula_cdf",
    "clayton",
    "correlation_matrix",
    "frank",
    "gumbel",
    "load_correlation",
    "logistic",
    "parse_model",
    "parse_model_spec",
    "tail_dependence_function",
]
