"""Deterministic random variates shared by every sketching algorithm.

Every variate is a pure function of ``(master_seed, element_id, sample_index,
role)``: the same element in two different sets sees the same ``r``, ``beta``,
``c`` and ``u`` values, which is what makes the samplers consistent across
documents. Nothing is stored; variates are recomputed on demand with a
vectorised SplitMix64-style keyed hash.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InvalidParameterError, OutOfRangeError

__all__ = [
    "Role",
    "VariateKey",
    "VariateScheme",
    "uniform01",
    "gamma21",
    "uniform_power",
    "TINY_UNIFORM",
]

_U64 = np.uint64
_MASK64 = (1 << 64) - 1
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = _U64(30), _U64(27), _U64(31), _U64(11)

# Smallest positive double; exact-zero draws are mapped here so log() stays finite.
TINY_UNIFORM = float(np.nextafter(0.0, 1.0))
_INV_2_53 = 2.0**-53

# Sub-stream indices. Gamma variates consume two uniforms of their own.
_SUB_UNIFORM = 0
_SUB_GAMMA = (1, 2)


class Role(enum.IntEnum):
    """Which symbol of the sampling algorithms a variate stands for."""

    R1 = 1
    R2 = 2
    BETA1 = 3
    BETA2 = 4
    C = 5
    U = 6
    # secondary uniform: Gollapudi ranking, Haeupler fractional inclusion
    V = 7


@dataclass(frozen=True)
class VariateKey:
    element_id: int
    sample_index: int
    role: Role

    def __post_init__(self):
        if not 0 <= self.element_id <= _MASK64:
            raise InvalidParameterError(f"element_id {self.element_id} is not an unsigned 64-bit value")
        if self.sample_index < 0:
            raise OutOfRangeError(f"negative sample index {self.sample_index}")


def _mix(x):
    x = x ^ (x >> _S30)
    x = x * _M1
    x = x ^ (x >> _S27)
    x = x * _M2
    return x ^ (x >> _S31)


def _as_u64(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype != np.uint64:
        if arr.size and (arr.min() < 0):
            raise InvalidParameterError("element ids must be nonnegative")
        arr = arr.astype(np.uint64)
    return arr


@dataclass(frozen=True)
class VariateScheme:
    """Seeded source of all per-(element, sample, role) variates.

    ``pins`` and ``component_pins`` are a test-only surface: they force the
    value of a role-level variate, or of one of the two uniforms underlying a
    Gamma(2,1) draw (component 0 is ``u_a``, 1 is ``u_b``).
    """

    master_seed: int
    D: int
    pins: Mapping[VariateKey, float] = field(default_factory=dict, compare=False, repr=False)
    component_pins: Mapping[tuple[VariateKey, int], float] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise InvalidParameterError("master_seed must be an unsigned 64-bit integer")
        if self.D < 1:
            raise InvalidParameterError(f"D must be >= 1, got {self.D}")
        with np.errstate(over="ignore"):
            seed_h = _mix(np.array([self.master_seed], dtype=np.uint64) + _GOLDEN)
        object.__setattr__(self, "_seed_h", seed_h[0])

    def with_pins(self, pins=None, component_pins=None) -> "VariateScheme":
        return VariateScheme(
            self.master_seed,
            self.D,
            pins={**self.pins, **(pins or {})},
            component_pins={**self.component_pins, **(component_pins or {})},
        )

    def _check_ds(self, ds: np.ndarray) -> None:
        if ds.size and (ds.min() < 0 or ds.max() >= self.D):
            raise OutOfRangeError(f"sample index outside 0..{self.D - 1}")

    def _raw_uniform(self, elements, ds, role: Role, sub: int) -> np.ndarray:
        # elements and ds broadcast against each other
        # absorb key parts one at a time, each followed by a full mix:
        # (seed, element) -> + (role, sub) -> ^ sample index -> final round
        with np.errstate(over="ignore"):
            sub = np.asarray(sub).astype(np.uint64)
            tag = _mix(((_U64(int(role)) << _U64(32)) | sub) ^ self._seed_h)
            h = _mix(_mix(_as_u64(elements) ^ self._seed_h) + tag)
            dh = _mix((np.asarray(ds).astype(np.uint64) + _U64(1)) * _GOLDEN)
            h = _mix(_mix(h ^ dh) + _GOLDEN)
        u = (h >> _S11).astype(np.float64) * _INV_2_53
        return np.where(u == 0.0, TINY_UNIFORM, u)

    def _apply_pins(self, out, elements, ds, pins):
        if not pins:
            return out
        elements = _as_u64(elements)
        ds = np.asarray(ds)
        out = np.array(out, dtype=np.float64, copy=True)
        for (element_id, d), value in pins.items():
            mask = (elements == np.uint64(element_id)) & (ds == d)
            if mask.ndim < out.ndim or mask.shape != out.shape:
                mask = np.broadcast_to(mask, out.shape)
            out[mask] = value
        return out

    def _pins_for(self, role: Role, component: int | None = None) -> dict:
        if component is None:
            return {(k.element_id, k.sample_index): v for k, v in self.pins.items() if k.role == role}
        return {
            (k.element_id, k.sample_index): v
            for (k, c), v in self.component_pins.items()
            if k.role == role and c == component
        }

    def uniform(self, elements, ds, role: Role, sub=_SUB_UNIFORM) -> np.ndarray:
        """Uniform(0,1) draws for broadcast ``elements`` x ``ds``; never 0 or 1.

        ``sub`` (scalar or broadcastable array) selects an extra sub-stream,
        used to give quantized subelements ``(k, j)`` their own hash values.
        Pins only apply to the default sub-stream.
        """
        ds = np.asarray(ds)
        self._check_ds(ds)
        out = self._raw_uniform(elements, ds, role, sub)
        if np.isscalar(sub) and sub == _SUB_UNIFORM:
            out = self._apply_pins(out, elements, ds, self._pins_for(role))
        return out

    def gamma(self, elements, ds, role: Role) -> np.ndarray:
        """Gamma(2,1) draws as ``-ln(u_a * u_b)``."""
        ds = np.asarray(ds)
        self._check_ds(ds)
        ua = self._apply_pins(
            self._raw_uniform(elements, ds, role, _SUB_GAMMA[0]), elements, ds, self._pins_for(role, 0)
        )
        ub = self._apply_pins(
            self._raw_uniform(elements, ds, role, _SUB_GAMMA[1]), elements, ds, self._pins_for(role, 1)
        )
        # sum of logs: ua * ub can underflow to 0 when both are tiny
        r = -(np.log(ua) + np.log(ub))
        return self._apply_pins(r, elements, ds, self._pins_for(role))


def _scalar(arr) -> float:
    return float(np.asarray(arr).reshape(-1)[0])


def uniform01(scheme: VariateScheme, key: VariateKey) -> float:
    if key.sample_index >= scheme.D:
        raise OutOfRangeError(f"sample index {key.sample_index} >= D={scheme.D}")
    return _scalar(scheme.uniform(np.array([key.element_id], dtype=np.uint64), np.array([key.sample_index]), key.role))


def gamma21(scheme: VariateScheme, key: VariateKey) -> float:
    if key.sample_index >= scheme.D:
        raise OutOfRangeError(f"sample index {key.sample_index} >= D={scheme.D}")
    return _scalar(scheme.gamma(np.array([key.element_id], dtype=np.uint64), np.array([key.sample_index]), key.role))


def uniform_power(scheme: VariateScheme, key_r: VariateKey, key_b: VariateKey) -> float:
    """``exp(-r) ** b`` for ``r ~ Gamma(2,1)`` and ``b ~ Uniform(0,1)``.

    The result is again Uniform(0,1) even though ``r`` and ``b`` enter
    non-linearly.
    """
    if key_r.role == key_b.role:
        raise InvalidParameterError("key_r and key_b must differ in role")
    r = gamma21(scheme, key_r)
    b = uniform01(scheme, key_b)
    return float(np.exp(-r) ** b)
