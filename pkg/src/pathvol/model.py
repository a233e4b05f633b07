"""Model specifications for scalar diffusions with power-type noise.

The processes handled by this package solve

    dy(t) = f(y(.), t) dt + sigma * y(t)**gamma dw(t),    y(theta) > 0,

with gamma in [0, 1].  Two drift families are provided: the affine
mean-reverting drift a*(b - y) shared by the CIR (gamma = 1/2) and CKLS
models, and a randomized multi-term drift with a fixed delay that is used
to stress-test the estimators on paths far from any parametric family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AffineDrift",
    "DelayDriftSpec",
    "ModelSpec",
    "cir_model",
    "ckls_model",
    "eval_drift",
    "sample_delay_drift",
    "format_model_config",
    "parse_model_config",
]


@dataclass(frozen=True)
class AffineDrift:
    """Mean-reverting drift a*(b - x); used by both CIR and CKLS models."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("drift parameters a, b must be finite")
        if self.a < 0 or self.b < 0:
            raise ValueError("drift parameters a, b must be >= 0")


_VECTOR_FIELDS = ("a", "b", "nu", "c", "d", "e", "a_hat", "b_hat", "nu_hat")


@dataclass(frozen=True)
class DelayDriftSpec:
    """Multi-term drift with one fixed delay in the second argument.

    The drift value at state ``x`` with delayed state ``x_lag`` is

        sum_k [ a[k] * (b[k] - x ** (nu[k] + 1/2))
                + c[k] * cos(d[k] * x + e[k])
                + 0.1 * a_hat[k] * (b_hat[k] - x_lag ** (nu_hat[k] + 1/2)) ]

    ``delay`` is the lag in time units; the simulator converts it into a
    whole number of grid steps (see ``simulate.SimConfig.delay_rule``).
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    nu: tuple[float, ...]
    c: tuple[float, ...]
    d: tuple[float, ...]
    e: tuple[float, ...]
    a_hat: tuple[float, ...]
    b_hat: tuple[float, ...]
    nu_hat: tuple[float, ...]
    delay: float = 0.0

    def __post_init__(self) -> None:
        for name in _VECTOR_FIELDS:
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        n = len(self.a)
        if n < 1:
            raise ValueError("drift needs at least one term")
        for name in _VECTOR_FIELDS:
            got = len(getattr(self, name))
            if got != n:
                raise ValueError(f"parameter vector {name!r} has length {got}, expected {n}")
        if not (math.isfinite(self.delay) and self.delay >= 0):
            raise ValueError("delay must be finite and >= 0")

    @property
    def n_terms(self) -> int:
        return len(self.a)


DriftKind = AffineDrift | DelayDriftSpec


@dataclass(frozen=True)
class ModelSpec:
    """Full model: drift kind plus diffusion scale sigma and power gamma.

    sigma = 0 is accepted and yields noiseless (deterministic) paths, which
    several tests rely on; the estimators themselves assume sigma > 0.
    """

    drift: DriftKind
    sigma: float
    gamma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("sigma must be finite and >= 0")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")


def cir_model(a: float, b: float, sigma: float) -> ModelSpec:
    """Square-root diffusion dy = a*(b - y) dt + sigma * sqrt(y) dw."""
    return ModelSpec(drift=AffineDrift(a, b), sigma=sigma, gamma=0.5)


def ckls_model(a: float, b: float, sigma: float, gamma: float) -> ModelSpec:
    """Power diffusion dy = a*(b - y) dt + sigma * y**gamma dw."""
    return ModelSpec(drift=AffineDrift(a, b), sigma=sigma, gamma=gamma)


def eval_drift(spec: ModelSpec, x: float, x_lagged: float) -> float:
    """Drift value at state x; x_lagged feeds the delayed terms only.

    Affine drifts ignore x_lagged.  Both states must be positive so the
    fractional powers are defined.
    """
    if x <= 0.0 or x_lagged <= 0.0:
        raise ValueError("drift is defined for positive states only")
    d = spec.drift
    if isinstance(d, AffineDrift):
        return d.a * d.b - d.a * x
    total = 0.0
    for k in range(d.n_terms):
        total += d.a[k] * (d.b[k] - x ** (d.nu[k] + 0.5))
        total += d.c[k] * math.cos(d.d[k] * x + d.e[k])
        total += 0.1 * d.a_hat[k] * (d.b_hat[k] - x_lagged ** (d.nu_hat[k] + 0.5))
    return total


def sample_delay_drift(rng: np.random.Generator) -> DelayDriftSpec:
    """Draw a randomized delay drift for Monte-Carlo experiments.

    The number of terms is uniform on {1, ..., 5}, the delay is uniform on
    [0, 0.2], and every per-term coefficient is uniform on [0, 1], all
    independent.
    """
    n = int(rng.integers(1, 6))
    delay = float(rng.uniform(0.0, 0.2))
    draws = [tuple(float(v) for v in rng.uniform(0.0, 1.0, size=n)) for _ in _VECTOR_FIELDS]
    return DelayDriftSpec(*draws, delay=delay)


# ---------------------------------------------------------------------------
# flat key=value serialization, used by the command line tool


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_model_config(spec: ModelSpec) -> str:
    """Render a ModelSpec as flat key=value lines (see parse_model_config)."""
    lines: list[str] = []
    d = spec.drift
    if isinstance(d, AffineDrift):
        kind = "cir" if spec.gamma == 0.5 else "ckls"
        lines.append(f"model={kind}")
        lines.append(f"a={_fmt(d.a)}")
        lines.append(f"b={_fmt(d.b)}")
    else:
        lines.append("model=random-delay")
        lines.append(f"n_terms={d.n_terms}")
        lines.append(f"delay={_fmt(d.delay)}")
        for name in _VECTOR_FIELDS:
            values = ",".join(_fmt(v) for v in getattr(d, name))
            lines.append(f"term_{name}={values}")
    lines.append(f"sigma={_fmt(spec.sigma)}")
    lines.append(f"gamma={_fmt(spec.gamma)}")
    return "\n".join(lines) + "\n"


def _parse_kv(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def _require(pairs: dict[str, str], key: str) -> str:
    if key not in pairs:
        raise ValueError(f"missing config key {key!r}")
    return pairs[key]


def _float_of(pairs: dict[str, str], key: str) -> float:
    raw = _require(pairs, key)
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"config key {key!r}: not a number: {raw!r}") from None


def parse_model_config(text: str) -> ModelSpec:
    """Parse flat key=value lines into a ModelSpec.

    Blank lines and lines starting with '#' are ignored.  Affine models use
    keys model=cir|ckls, a, b, sigma, gamma; randomized delay models use
    model=random-delay, n_terms, delay, sigma, gamma and comma-separated
    vectors term_a, term_b, term_nu, term_c, term_d, term_e, term_a_hat,
    term_b_hat, term_nu_hat.
    """
    pairs = _parse_kv(text)
    kind = _require(pairs, "model")
    sigma = _float_of(pairs, "sigma")
    if kind in ("cir", "ckls"):
        gamma = _float_of(pairs, "gamma") if (kind == "ckls" or "gamma" in pairs) else 0.5
        drift = AffineDrift(_float_of(pairs, "a"), _float_of(pairs, "b"))
        return ModelSpec(drift=drift, sigma=sigma, gamma=gamma)
    if kind == "random-delay":
        n = int(_float_of(pairs, "n_terms"))
        vectors = {}
        for name in _VECTOR_FIELDS:
            raw = _require(pairs, f"term_{name}")
            try:
                values = tuple(float(v) for v in raw.split(","))
            except ValueError:
                raise ValueError(f"config key 'term_{name}': not a number list: {raw!r}") from None
            if len(values) != n:
                raise ValueError(f"config key 'term_{name}': expected {n} values, got {len(values)}")
            vectors[name] = values
        drift = DelayDriftSpec(delay=_float_of(pairs, "delay"), **vectors)
        return ModelSpec(drift=drift, sigma=sigma, gamma=_float_of(pairs, "gamma"))
    raise ValueError(f"unknown model kind {kind!r} (expected cir, ckls or random-delay)")
