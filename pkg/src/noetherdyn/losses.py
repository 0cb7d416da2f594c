"""Differentiable toy objectives with exact, declared symmetries.

Each loss carries an analytic gradient and knows which transforms leave
its value invariant, so symmetry claims can be asserted rather than
assumed.  All losses are full-batch deterministic: the closed-form
comparisons elsewhere need exact values, not noisy estimates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, SingularLossError
from .symmetry import Rescale, Rotation, Scale, SymmetryTransform, Translation

_ORIGIN_TOL = 1e-12


class Loss:
    """Objective f(q) with analytic gradient and declared symmetries."""

    dim: int
    name: str
    scale_invariant = False

    def value(self, q) -> float:
        raise NotImplementedError

    def grad(self, q) -> np.ndarray:
        raise NotImplementedError

    def is_symmetric_under(self, transform: SymmetryTransform) -> bool:
        """True if the loss value is exactly invariant under the transform."""
        return False

    def _as_point(self, q):
        q = np.asarray(q, dtype=float)
        if self.scale_invariant and np.linalg.norm(q) <= _ORIGIN_TOL:
            raise SingularLossError("origin is a singular point of scale-invariant losses")
        return q

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class RayleighQuotient(Loss):
    """f(q) = <q, A q> / |q|^2 for symmetric A.

    Exactly scale invariant; its gradient is tangent to the sphere
    (<grad f, q> = 0) and obeys |grad f(a q)| = |grad f(q)| / a.
    """

    name = "rayleigh"
    scale_invariant = True

    def __init__(self, matrix):
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.allclose(a, a.T, atol=1e-12):
            raise ValueError("matrix must be square symmetric")
        self.matrix = a
        self.dim = a.shape[0]

    def value(self, q):
        q = self._as_point(q)
        return float(q @ self.matrix @ q) / float(q @ q)

    def grad(self, q):
        q = self._as_point(q)
        r2 = float(q @ q)
        aq = self.matrix @ q
        f = float(q @ aq) / r2
        return 2.0 * (aq - f * q) / r2

    def is_symmetric_under(self, transform):
        return isinstance(transform, Scale)


class NormalizedComposite(Loss):
    """Base loss evaluated on the unit sphere: f(q) = base(q / |q|).

    Composing with the normalization makes any base loss exactly scale
    invariant, the deterministic stand-in for a normalization layer.
    """

    name = "normalized"
    scale_invariant = True

    def __init__(self, base: Loss):
        self.base = base
        self.dim = base.dim

    def value(self, q):
        q = self._as_point(q)
        return self.base.value(q / np.linalg.norm(q))

    def grad(self, q):
        q = self._as_point(q)
        r = np.linalg.norm(q)
        unit = q / r
        g = self.base.grad(unit)
        return (g - float(g @ unit) * unit) / r

    def is_symmetric_under(self, transform):
        return isinstance(transform, Scale)


class TwoLayerChain(Loss):
    """Scalar linear chain f(q1, q2) = sum_j (q2 q1 x_j - y_j)^2 / 2.

    Invariant under the rescale map (q1, q2) -> (a q1, q2 / a), the smooth
    analogue of the rescaling freedom a ReLU pair leaves in a network.
    """

    name = "two-layer-chain"
    dim = 2

    def __init__(self, x, y):
        self.x = np.atleast_1d(np.asarray(x, dtype=float))
        self.y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.x.shape != self.y.shape:
            raise ValueError("inputs and targets must have matching shapes")
        self.split = 1

    def value(self, q):
        q1, q2 = np.asarray(q, dtype=float)
        resid = q2 * q1 * self.x - self.y
        return 0.5 * float(resid @ resid)

    def grad(self, q):
        q1, q2 = np.asarray(q, dtype=float)
        resid = q2 * q1 * self.x - self.y
        return np.array([float(resid @ self.x) * q2, float(resid @ self.x) * q1])

    def is_symmetric_under(self, transform):
        return isinstance(transform, Rescale) and transform.split == self.split


class SoftmaxCrossEntropy(Loss):
    """Cross-entropy of a softmax over raw logits q against a fixed label.

    Invariant under translating all logits together, i.e. along the
    uniform direction.
    """

    name = "softmax-xent"

    def __init__(self, label: int, dim: int):
        if not 0 <= label < dim:
            raise ValueError("label out of range")
        self.label = int(label)
        self.dim = int(dim)

    def value(self, q):
        q = np.asarray(q, dtype=float)
        shifted = q - q.max()
        return float(np.log(np.sum(np.exp(shifted))) - shifted[self.label])

    def grad(self, q):
        q = np.asarray(q, dtype=float)
        shifted = np.exp(q - q.max())
        p = shifted / shifted.sum()
        p[self.label] -= 1.0
        return p

    def is_symmetric_under(self, transform):
        if not isinstance(transform, Translation):
            return False
        uniform = np.ones(self.dim) / np.sqrt(self.dim)
        return bool(np.allclose(np.abs(transform.direction @ uniform), 1.0, atol=1e-12))


class RadialWell(Loss):
    """Rotation-invariant potential f(q) = v(|q|)."""

    name = "radial-well"

    def __init__(self, v, dv, dim: int):
        self.v = v
        self.dv = dv
        self.dim = int(dim)

    @classmethod
    def harmonic(cls, radius: float, stiffness: float, dim: int):
        """Well v(r) = stiffness (r - radius)^2 / 2 around a preferred norm."""
        return cls(lambda r: 0.5 * stiffness * (r - radius) ** 2,
                   lambda r: stiffness * (r - radius), dim)

    def value(self, q):
        return float(self.v(np.linalg.norm(np.asarray(q, dtype=float))))

    def grad(self, q):
        q = np.asarray(q, dtype=float)
        r = np.linalg.norm(q)
        if r <= _ORIGIN_TOL:
            raise SingularLossError("radial gradient is undefined at the origin")
        return (self.dv(r) / r) * q

    def is_symmetric_under(self, transform):
        return isinstance(transform, Rotation)


class Quadratic(Loss):
    """f(q) = <q, A q> / 2 + <b, q> for symmetric positive-semidefinite A.

    Translation invariant along any null direction of A orthogonal to b,
    which makes a degenerate quadratic a convenient exactly-invariant
    objective with tunable curvature.
    """

    name = "quadratic"

    def __init__(self, matrix, offset=None):
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.allclose(a, a.T, atol=1e-12):
            raise ValueError("matrix must be square symmetric")
        self.matrix = a
        self.dim = a.shape[0]
        self.offset = np.zeros(self.dim) if offset is None else np.asarray(offset, dtype=float)

    def value(self, q):
        q = np.asarray(q, dtype=float)
        return 0.5 * float(q @ self.matrix @ q) + float(self.offset @ q)

    def grad(self, q):
        q = np.asarray(q, dtype=float)
        return self.matrix @ q + self.offset

    def is_symmetric_under(self, transform):
        if not isinstance(transform, Translation):
            return False
        n = transform.direction
        return bool(np.linalg.norm(self.matrix @ n) <= 1e-12
                    and abs(self.offset @ n) <= 1e-12)


@dataclass
class SymmetryCheck:
    samples: int
    max_value_violation: float
    max_generator_violation: float


def check_symmetry(loss: Loss, transform: SymmetryTransform, samples: int = 100,
                   seed: int = 0, tol: float = 1e-10) -> SymmetryCheck:
    """Assert a declared symmetry on random states and finite shifts.

    Checks |f(Q(q,s)) - f(q)| <= tol (1 + |f(q)|) for s in [-0.5, 0.5] and
    the generator orthogonality <grad f, dQ/ds> = 0 to the same tolerance.
    Raises ContractError for transforms the loss does not declare.
    """
    if not loss.is_symmetric_under(transform):
        raise ContractError(
            f"{loss.name} does not declare invariance under {transform.name}")
    rng = np.random.default_rng(seed)
    worst_value = 0.0
    worst_gen = 0.0
    for _ in range(samples):
        q = rng.standard_normal(loss.dim)
        if loss.scale_invariant and np.linalg.norm(q) < 0.1:
            q = q + 1.0
        s = rng.uniform(-0.5, 0.5)
        f0 = loss.value(q)
        scale = tol * (1.0 + abs(f0))
        dv = abs(loss.value(transform.apply(q, s)) - f0)
        dg = abs(float(loss.grad(q) @ transform.generator(q)))
        if dv > scale or dg > scale:
            raise AssertionError(
                f"symmetry violation for ({loss.name}, {transform.name}): "
                f"value drift {dv:.3e}, generator product {dg:.3e}, allowed {scale:.3e}")
        worst_value = max(worst_value, dv)
        worst_gen = max(worst_gen, dg)
    return SymmetryCheck(samples, worst_value, worst_gen)
