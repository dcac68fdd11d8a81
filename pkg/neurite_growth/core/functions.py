# neurite_growth/core/functions.py
# Closed-form coupling functions: rates α/β of the pools, boundary gates g,
# growth laws h and soma production γ
# Does NOT know about neurites or pools, only evaluates maps and their derivatives

import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np

Polynomial = Tuple[float, float, float]


def _is_array(x) -> bool:
    return isinstance(x, np.ndarray)


def _sigmoid(z: float) -> float:
    """1/(1+exp(-z)) on a float without overflow"""
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


class ScalarMap:
    """Map of one pool amount Λ to a rate"""

    kind = "scalar"

    def __call__(self, s):
        raise NotImplementedError

    def derivative(self, s):
        raise NotImplementedError

    def polynomial(self) -> Optional[Polynomial]:
        """Coefficients (c0, c1, c2) if the map is a polynomial of degree <= 2"""
        return None

    def describe(self) -> str:
        return self.kind

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kind"] = self.kind
        return data


@dataclass(frozen=True)
class Constant(ScalarMap):
    value: float = 0.0

    kind = "constant"

    def __call__(self, s):
        if _is_array(s):
            return np.full_like(s, self.value, dtype=float)
        return self.value

    def derivative(self, s):
        return 0.0 * s

    def polynomial(self) -> Optional[Polynomial]:
        return (self.value, 0.0, 0.0)

    def describe(self) -> str:
        return f"{self.value:g}"


@dataclass(frozen=True)
class Affine(ScalarMap):
    """offset + slope * s"""

    offset: float = 0.0
    slope: float = 0.0

    kind = "affine"

    def __call__(self, s):
        return self.offset + self.slope * s

    def derivative(self, s):
        if _is_array(s):
            return np.full_like(s, self.slope, dtype=float)
        return self.slope

    def polynomial(self) -> Optional[Polynomial]:
        return (self.offset, self.slope, 0.0)

    def describe(self) -> str:
        return f"{self.offset:g} + {self.slope:g}*s"


@dataclass(frozen=True)
class Logistic(ScalarMap):
    """height / (1 + exp(-steepness * (s - midpoint)))"""

    height: float = 1.0
    steepness: float = 1.0
    midpoint: float = 0.0

    kind = "logistic"

    def __call__(self, s):
        if not _is_array(s):
            return self.height * _sigmoid(self.steepness * (s - self.midpoint))
        return self.height / (1.0 + np.exp(-self.steepness * (s - self.midpoint)))

    def derivative(self, s):
        if not _is_array(s):
            z = self.steepness * (s - self.midpoint)
            return self.height * self.steepness * _sigmoid(z) * _sigmoid(-z)
        e = np.exp(-self.steepness * (s - self.midpoint))
        return self.height * self.steepness * e / (1.0 + e) ** 2

    def describe(self) -> str:
        return f"{self.height:g}/(1+exp(-{self.steepness:g}*(s-{self.midpoint:g})))"


@dataclass(frozen=True)
class Arctan(ScalarMap):
    """scale * atan(s - shift)"""

    scale: float = 1.0
    shift: float = 0.0

    kind = "arctan"

    def __call__(self, s):
        if not _is_array(s):
            return self.scale * math.atan(s - self.shift)
        return self.scale * np.arctan(s - self.shift)

    def derivative(self, s):
        return self.scale / (1.0 + (s - self.shift) ** 2)

    def describe(self) -> str:
        return f"{self.scale:g}*atan(s-{self.shift:g})"


@dataclass(frozen=True)
class Product(ScalarMap):
    left: ScalarMap = Constant(1.0)
    right: ScalarMap = Constant(1.0)

    kind = "product"

    def __call__(self, s):
        return self.left(s) * self.right(s)

    def derivative(self, s):
        return self.left.derivative(s) * self.right(s) + self.left(s) * self.right.derivative(s)

    def polynomial(self) -> Optional[Polynomial]:
        p, q = self.left.polynomial(), self.right.polynomial()
        if p is None or q is None:
            return None
        full = np.polynomial.polynomial.polymul(p, q)
        if np.any(full[3:] != 0.0):
            return None
        full = np.pad(full, (0, 3))[:3]
        return (float(full[0]), float(full[1]), float(full[2]))

    def describe(self) -> str:
        return f"({self.left.describe()})*({self.right.describe()})"

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "left": self.left.to_dict(), "right": self.right.to_dict()}


class PairMap:
    """Boundary gate g(f+, f-) evaluated on the trace of a neurite"""

    kind = "pair"

    def __call__(self, f_plus, f_minus):
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kind"] = self.kind
        return data


@dataclass(frozen=True)
class ExclusionGate(PairMap):
    """scale * carrier * (1 - (f+ + f-)/cap) with carrier one of 1, f+, f-"""

    cap: float = 1.0
    carrier: str = "none"
    scale: float = 1.0

    kind = "exclusion"

    def __post_init__(self):
        if self.carrier not in ("none", "plus", "minus"):
            raise ValueError(f"Unknown carrier '{self.carrier}'")
        if self.cap <= 0:
            raise ValueError(f"Exclusion cap must be positive, got {self.cap}")

    def __call__(self, f_plus, f_minus):
        free = 1.0 - (f_plus + f_minus) / self.cap
        if self.carrier == "plus":
            return self.scale * f_plus * free
        if self.carrier == "minus":
            return self.scale * f_minus * free
        return self.scale * free

    def describe(self) -> str:
        carrier = {"none": "", "plus": "f+*", "minus": "f-*"}[self.carrier]
        return f"{self.scale:g}*{carrier}(1-rho/{self.cap:g})"


@dataclass(frozen=True)
class RetrogradeSensor(PairMap):
    """sqrt(max(0, 1 - slope*f-)^2 + smoothing) + offset

    Soft clamp that raises the soma release when few retrograde vesicles arrive.
    """

    slope: float = 3.0
    smoothing: float = 0.1
    offset: float = 0.5

    kind = "retrograde-sensor"

    def __call__(self, f_plus, f_minus):
        if not _is_array(f_minus):
            clamp = max(0.0, 1.0 - self.slope * f_minus)
            return math.sqrt(clamp * clamp + self.smoothing) + self.offset
        clamp = np.maximum(0.0, 1.0 - self.slope * f_minus)
        return np.sqrt(clamp ** 2 + self.smoothing) + self.offset

    def describe(self) -> str:
        return f"sqrt(max(0,1-{self.slope:g}*f-)^2+{self.smoothing:g})+{self.offset:g}"


@dataclass(frozen=True)
class PairProduct(PairMap):
    left: PairMap = ExclusionGate()
    right: PairMap = ExclusionGate()

    kind = "pair-product"

    def __call__(self, f_plus, f_minus):
        return self.left(f_plus, f_minus) * self.right(f_plus, f_minus)

    def describe(self) -> str:
        return f"({self.left.describe()})*({self.right.describe()})"

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "left": self.left.to_dict(), "right": self.right.to_dict()}


class GrowthMap:
    """Growth law h(Λ, L) of a neurite tip"""

    kind = "growth"
    length_independent = False

    def __call__(self, lam, length):
        raise NotImplementedError

    def d_length(self, lam, length):
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kind"] = self.kind
        return data


@dataclass(frozen=True)
class ArctanLogisticGrowth(GrowthMap):
    """atan(Λ - Λ_min) / (1 + exp(-k (L - ℓ - δ)))

    Growth switches sign at Λ_min; the logistic factor is a smoothed Heaviside
    that damps shrinkage close to the minimal length ℓ.
    """

    lambda_min: float = 1.0
    ell_min: float = 0.1
    steepness: float = 4.0
    delay: float = 0.2

    kind = "arctan-logistic"

    def _gate(self, length):
        return 1.0 / (1.0 + np.exp(-self.steepness * (length - self.ell_min - self.delay)))

    def __call__(self, lam, length):
        if not _is_array(lam) and not _is_array(length):
            gate = _sigmoid(self.steepness * (length - self.ell_min - self.delay))
            return math.atan(lam - self.lambda_min) * gate
        return np.arctan(lam - self.lambda_min) * self._gate(length)

    def d_length(self, lam, length):
        if not _is_array(lam) and not _is_array(length):
            z = self.steepness * (length - self.ell_min - self.delay)
            return math.atan(lam - self.lambda_min) * self.steepness * _sigmoid(z) * _sigmoid(-z)
        gate = self._gate(length)
        return np.arctan(lam - self.lambda_min) * self.steepness * gate * (1.0 - gate)

    def describe(self) -> str:
        return (f"atan(Λ-{self.lambda_min:g})/(1+exp(-{self.steepness:g}"
                f"*(L-{self.ell_min:g}-{self.delay:g})))")


@dataclass(frozen=True)
class LinearGrowth(GrowthMap):
    """lambda_rate * (Λ - Λ_ref) + length_rate * (L - L_ref)"""

    lambda_rate: float = 1.0
    length_rate: float = 1.0
    lambda_ref: float = 1.0
    length_ref: float = 1.0

    kind = "linear"

    def __call__(self, lam, length):
        return self.lambda_rate * (lam - self.lambda_ref) + self.length_rate * (length - self.length_ref)

    def d_length(self, lam, length):
        return self.length_rate + 0.0 * lam

    def describe(self) -> str:
        return (f"{self.lambda_rate:g}*(Λ-{self.lambda_ref:g})"
                f"+{self.length_rate:g}*(L-{self.length_ref:g})")


@dataclass(frozen=True)
class ConstantGrowth(GrowthMap):
    value: float = 0.0

    kind = "constant-growth"
    length_independent = True

    def __call__(self, lam, length):
        return self.value + 0.0 * lam + 0.0 * length

    def d_length(self, lam, length):
        return 0.0 * lam

    def describe(self) -> str:
        return f"{self.value:g}"


class ProductionMap:
    """Soma production γ(t)"""

    kind = "production"

    def __call__(self, t):
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kind"] = self.kind
        return data


@dataclass(frozen=True)
class ConstantProduction(ProductionMap):
    value: float = 0.0

    kind = "constant-production"

    def __call__(self, t):
        return self.value + 0.0 * t

    def describe(self) -> str:
        return f"{self.value:g}"


@dataclass(frozen=True)
class DecayingProduction(ProductionMap):
    """initial * exp(-t / decay_time), vanishing for t -> inf"""

    initial: float = 1.0
    decay_time: float = 1.0

    kind = "decaying-production"

    def __post_init__(self):
        if self.decay_time <= 0:
            raise ValueError(f"decay_time must be positive, got {self.decay_time}")

    def __call__(self, t):
        if _is_array(t):
            return self.initial * np.exp(-t / self.decay_time)
        return self.initial * math.exp(-t / self.decay_time)

    def describe(self) -> str:
        return f"{self.initial:g}*exp(-t/{self.decay_time:g})"


_KINDS = {
    cls.kind: cls
    for cls in (Constant, Affine, Logistic, Arctan, Product,
                ExclusionGate, RetrogradeSensor, PairProduct,
                ArctanLogisticGrowth, LinearGrowth, ConstantGrowth,
                ConstantProduction, DecayingProduction)
}


def map_from_dict(data: Dict[str, Any]):
    """Build any coupling map from its serialised form"""
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"Unknown function kind '{kind}' (known: {', '.join(sorted(_KINDS))})")
    cls = _KINDS[kind]
    for key in ("left", "right"):
        if isinstance(data.get(key), dict):
            data[key] = map_from_dict(data[key])
    try:
        return cls(**data)
    except TypeError as e:
        raise ValueError(f"Invalid parameters for '{kind}': {e}") from e
