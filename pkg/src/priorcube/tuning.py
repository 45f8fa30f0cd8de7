"""The centre-shift function b and half-width function s defining a cube family.

Three kinds are supported:

* ``spline``   -- b is a clamped cubic spline through odd-reflected knot
  values with zero slope at +-r, s a natural cubic spline on [0, r];
  beyond r, b = 0 and s = d.
* ``naive``    -- the piecewise functions reproducing the pretest cube.
* ``standard`` -- b = 0, s = d (the usual studentized-maximum-modulus cube).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

SPLINE = "spline"
NAIVE = "naive"
STANDARD = "standard"
KINDS = (SPLINE, NAIVE, STANDARD)


class RecordError(ValueError):
    """A serialized function record is malformed; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class TuningSpec:
    r: float
    lam: float
    knots: tuple[float, ...]

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        object.__setattr__(self, "knots", knots)
        if not self.r > 0:
            raise ValueError(f"r: cutoff must be positive, got {self.r!r}")
        if not self.lam >= 0:
            raise ValueError(f"lambda: weight must be nonnegative, got {self.lam!r}")
        if len(knots) < 3:
            raise ValueError("knots: at least 3 knots are required")
        if knots[0] != 0.0 or not math.isclose(knots[-1], self.r, rel_tol=0, abs_tol=1e-12):
            raise ValueError("knots: must start at 0 and end at r")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError("knots: must be strictly increasing")

    @classmethod
    def evenly_spaced(cls, r: float, lam: float, m: int = 7) -> "TuningSpec":
        return cls(r=r, lam=lam, knots=tuple(np.linspace(0.0, r, m)))

    @property
    def m(self) -> int:
        return len(self.knots)

    @property
    def n_params(self) -> int:
        return 2 * self.m - 3


@dataclass(frozen=True, eq=False)
class BSFunctions:
    kind: str
    alpha: float
    nu: float
    d: float
    spec: TuningSpec | None = None
    b_values: tuple[float, ...] = ()
    s_values: tuple[float, ...] = ()
    d_tilde: float | None = None
    q: float | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind: unknown kind {self.kind!r}")
        if not self.d > 0:
            raise ValueError("d: must be positive")
        if self.kind == SPLINE:
            self._init_spline()
        elif self.kind == NAIVE:
            if self.q is None or self.d_tilde is None or not (self.q > 0 and self.d_tilde > 0):
                raise ValueError("naive functions need positive q and d_tilde")

    def _init_spline(self):
        spec = self.spec
        if spec is None:
            raise ValueError("spec: spline functions need a TuningSpec")
        b_vals = tuple(float(v) for v in self.b_values)
        s_vals = tuple(float(v) for v in self.s_values)
        object.__setattr__(self, "b_values", b_vals)
        object.__setattr__(self, "s_values", s_vals)
        if len(b_vals) != spec.m - 2:
            raise ValueError(f"b_values: expected {spec.m - 2} values, got {len(b_vals)}")
        if len(s_vals) != spec.m - 1:
            raise ValueError(f"s_values: expected {spec.m - 1} values, got {len(s_vals)}")
        knots = np.asarray(spec.knots)
        b_full = np.concatenate([[0.0], b_vals, [0.0]])
        sym_knots = np.concatenate([-knots[:0:-1], knots])
        sym_b = np.concatenate([-b_full[:0:-1], b_full])
        object.__setattr__(self, "_b_spline", CubicSpline(sym_knots, sym_b, bc_type="clamped"))
        object.__setattr__(
            self, "_s_spline", CubicSpline(knots, np.append(s_vals, self.d), bc_type="natural")
        )

    # -- constructors --------------------------------------------------

    @classmethod
    def standard(cls, d: float, alpha: float, nu: float) -> "BSFunctions":
        return cls(kind=STANDARD, alpha=alpha, nu=nu, d=d)

    @classmethod
    def naive(cls, constants) -> "BSFunctions":
        return cls(
            kind=NAIVE,
            alpha=constants.alpha,
            nu=constants.nu,
            d=constants.d,
            d_tilde=constants.d_tilde,
            q=constants.q,
        )

    @classmethod
    def spline(cls, spec: TuningSpec, b_values, s_values, d: float, alpha: float, nu: float, **meta):
        return cls(
            kind=SPLINE, alpha=alpha, nu=nu, d=d, spec=spec,
            b_values=tuple(b_values), s_values=tuple(s_values), meta=dict(meta),
        )

    @classmethod
    def flat_spline(cls, spec: TuningSpec, d: float, alpha: float, nu: float) -> "BSFunctions":
        """Spline that coincides with the standard cube (b = 0, s = d)."""
        return cls.spline(spec, np.zeros(spec.m - 2), np.full(spec.m - 1, d), d, alpha, nu)

    @property
    def cutoff(self) -> float | None:
        """Where the functions revert to the standard cube (r, q, or None)."""
        if self.kind == SPLINE:
            return self.spec.r
        if self.kind == NAIVE:
            return self.q
        return None

    # -- evaluation ----------------------------------------------------

    def b(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == STANDARD:
            out = np.zeros_like(x)
        elif self.kind == NAIVE:
            out = np.where(np.abs(x) <= self.q, 0.5 * x, 0.0)
        else:
            ax = np.abs(x)
            inside = ax < self.spec.r
            out = np.where(inside, np.sign(x) * self._b_spline(np.minimum(ax, self.spec.r)), 0.0)
        return float(out) if out.ndim == 0 else out

    def s(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("s is defined on x >= 0 only")
        if self.kind == STANDARD:
            out = np.full_like(x, self.d)
        elif self.kind == NAIVE:
            if self.nu == math.inf:
                accepted = np.full_like(x, self.d_tilde * math.sqrt(3.0) / 2.0)
            else:
                accepted = self.d_tilde * (math.sqrt(3.0) / 2.0) * np.sqrt(
                    (self.nu + x * x) / (self.nu + 1.0)
                )
            out = np.where(x <= self.q, accepted, self.d)
        else:
            inside = x < self.spec.r
            out = np.where(inside, self._s_spline(np.minimum(x, self.spec.r)), self.d)
        return float(out) if out.ndim == 0 else out

    def lower_upper(self, h, w):
        """Interval ends (l(h, w), u(h, w)) of the centred pivot region."""
        x = np.asarray(h, dtype=float) / w
        b = self.b(x)
        s = self.s(np.abs(x))
        return (b - s) * w, (b + s) * w

    # -- serialization -------------------------------------------------

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "kind": self.kind,
            "alpha": self.alpha,
            "nu": _encode_df(self.nu),
            "d": self.d,
            "r": self.spec.r if self.spec else None,
            "lambda": self.spec.lam if self.spec else None,
            "knots": list(self.spec.knots) if self.spec else [],
            "b_values": list(self.b_values),
            "s_values": list(self.s_values),
            "d_tilde": self.d_tilde,
            "q": self.q,
        }
        if self.meta:
            rec["meta"] = dict(self.meta)
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "BSFunctions":
        kind = _field(rec, "kind", str)
        if kind not in KINDS:
            raise RecordError("kind", f"unknown kind {kind!r}")
        alpha = _field(rec, "alpha", float)
        if not 0 < alpha < 1:
            raise RecordError("alpha", "must lie in (0, 1)")
        try:
            nu = _decode_df(rec.get("nu"))
        except ValueError as exc:
            raise RecordError("nu", str(exc)) from None
        d = _field(rec, "d", float)
        kwargs: dict[str, Any] = dict(kind=kind, alpha=alpha, nu=nu, d=d, meta=dict(rec.get("meta") or {}))
        if kind == SPLINE:
            r = _field(rec, "r", float)
            lam = _field(rec, "lambda", float)
            knots = _float_list(rec, "knots")
            try:
                kwargs["spec"] = TuningSpec(r=r, lam=lam, knots=tuple(knots))
            except ValueError as exc:
                raise RecordError("knots", str(exc)) from None
            kwargs["b_values"] = tuple(_float_list(rec, "b_values"))
            kwargs["s_values"] = tuple(_float_list(rec, "s_values"))
        elif kind == NAIVE:
            kwargs["d_tilde"] = _field(rec, "d_tilde", float)
            kwargs["q"] = _field(rec, "q", float)
        for name in ("d_tilde", "q"):
            if kind != NAIVE and rec.get(name) is not None:
                kwargs[name] = _field(rec, name, float)
        try:
            return cls(**kwargs)
        except ValueError as exc:
            name = str(exc).split(":")[0] if ":" in str(exc) else "record"
            raise RecordError(name, str(exc)) from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_record(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "BSFunctions":
        text = Path(path).read_text()
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RecordError("record", f"not valid JSON ({exc})") from None
        if not isinstance(rec, dict):
            raise RecordError("record", "expected a JSON object")
        return cls.from_record(rec)


def eval_b(fns: BSFunctions, x):
    return fns.b(x)


def eval_s(fns: BSFunctions, x):
    return fns.s(x)


def lower_upper(fns: BSFunctions, h, w):
    return fns.lower_upper(h, w)


def _encode_df(nu: float):
    return "inf" if nu == math.inf else int(nu)


def _decode_df(value) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a positive integer or 'inf', got {value!r}")
    if value == math.inf:
        return math.inf
    if not (float(value).is_integer() and value >= 1):
        raise ValueError(f"expected a positive integer or 'inf', got {value!r}")
    return int(value)


def _field(rec, name, typ):
    if name not in rec or rec[name] is None:
        raise RecordError(name, "missing")
    value = rec[name]
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise RecordError(name, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise RecordError(name, "must be finite")
        return float(value)
    if not isinstance(value, typ):
        raise RecordError(name, f"expected {typ.__name__}, got {value!r}")
    return value


def _float_list(rec, name) -> list[float]:
    value = rec.get(name)
    if not isinstance(value, list):
        raise RecordError(name, "expected a list of numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise RecordError(name, f"non-numeric entry {v!r}")
        out.append(float(v))
    return out
