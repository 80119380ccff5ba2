"""Dense typed-valence tensors at a point, numeric or jet-valued.

Slot convention: all contravariant (upper) slots come before all covariant
(lower) slots, so a (1,2) tensor T^k_{ij} is stored as components[k, i, j].
Jet-valued tensors append one trailing coefficient axis; an optional leading
batch axis vectorizes over sample points.  Contraction, tensor product, and
metric raising/lowering all preserve this layout.

Frame sums never appear here: every trace the checks need is realized as an
index contraction against g or its inverse, which is frame-independent by
construction (the cross-validation against signed orthonormal frames lives in
the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .expr_jet import JetSpace


class SlotError(ValueError):
    pass


@dataclass
class TensorValue:
    """Dense tensor of valence (p contravariant, q covariant) in dimension
    ``dim``.  ``space`` is None for numeric entries; ``batched`` marks a
    leading sample axis shared by all operands of an operation."""

    dim: int
    p: int
    q: int
    components: np.ndarray
    space: JetSpace | None = None
    batched: bool = False

    @property
    def rank(self) -> int:
        return self.p + self.q

    @property
    def _base(self) -> int:
        return 1 if self.batched else 0

    def _slot_axis(self, slot: int) -> int:
        return self._base + slot

    def __post_init__(self):
        expected = self.rank + self._base + (1 if self.space is not None else 0)
        if self.components.ndim != expected:
            raise ValueError(
                f"component array has {self.components.ndim} axes, expected {expected} "
                f"for valence ({self.p},{self.q}), batched={self.batched}, jet={self.space is not None}"
            )

    # -- views ---------------------------------------------------------------

    def value(self) -> "TensorValue":
        """Numeric tensor of constant terms (identity for numeric tensors)."""
        if self.space is None:
            return self
        return TensorValue(self.dim, self.p, self.q, self.components[..., 0], None, self.batched)

    def at(self, k: int) -> "TensorValue":
        """Select one sample of a batched tensor."""
        if not self.batched:
            raise ValueError("tensor is not batched")
        return TensorValue(self.dim, self.p, self.q, self.components[k], self.space, False)

    def as_jet(self, space: JetSpace) -> "TensorValue":
        """Embed a numeric tensor as constant jets."""
        if self.space is not None:
            return self
        comps = np.zeros(self.components.shape + (space.ncoeffs,))
        comps[..., 0] = self.components
        return TensorValue(self.dim, self.p, self.q, comps, space, self.batched)


def _promote(a: TensorValue, b: TensorValue) -> tuple[TensorValue, TensorValue, JetSpace | None]:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    space = a.space or b.space
    if space is not None:
        a, b = a.as_jet(space), b.as_jet(space)
    if a.batched != b.batched:
        # broadcast the unbatched operand across the sample axis
        if not a.batched:
            a = replace(a, components=a.components[None], batched=True)
        else:
            b = replace(b, components=b.components[None], batched=True)
    return a, b, space


def contract(T: TensorValue, upper_slot: int, lower_slot: int) -> TensorValue:
    """Trace one contravariant slot against one covariant slot.

    ``upper_slot`` indexes within the contravariant block, ``lower_slot``
    within the covariant block.
    """
    if not 0 <= upper_slot < T.p:
        raise SlotError(f"upper slot {upper_slot} out of range for valence ({T.p},{T.q})")
    if not 0 <= lower_slot < T.q:
        raise SlotError(f"lower slot {lower_slot} out of range for valence ({T.p},{T.q})")
    ax1 = T._slot_axis(upper_slot)
    ax2 = T._slot_axis(T.p + lower_slot)
    # np.trace removes the two axes and keeps the rest in order, which
    # preserves the uppers-first layout
    comps = np.trace(T.components, axis1=ax1, axis2=ax2)
    return TensorValue(T.dim, T.p - 1, T.q - 1, comps, T.space, T.batched)


def tensor_product(A: TensorValue, B: TensorValue) -> TensorValue:
    """Outer product; valences add, components multiply (jet-aware)."""
    A, B, space = _promote(A, B)
    base = A._base
    ra, rb = A.rank, B.rank
    ca = A.components
    cb = B.components
    # expand to [batch] + A-slots + B-slots (+ coeff)
    for _ in range(rb):
        ca = np.expand_dims(ca, base + ra if space is None else -2)
    for _ in range(ra):
        cb = np.expand_dims(cb, base)
    if space is None:
        comps = ca * cb
    else:
        comps = space.mul(ca, cb)
    # reorder to uppers-first: currently Au Al Bu Bl
    perm = list(range(comps.ndim))
    slot_axes = list(range(base, base + ra + rb))
    au = slot_axes[: A.p]
    al = slot_axes[A.p : ra]
    bu = slot_axes[ra : ra + B.p]
    bl = slot_axes[ra + B.p :]
    new_order = perm[:base] + au + bu + al + bl + perm[base + ra + rb :]
    comps = np.transpose(comps, new_order)
    return TensorValue(A.dim, A.p + B.p, A.q + B.q, comps, space, A.batched)


def _contract_axes(A: TensorValue, B: TensorValue, axis_a: int, axis_b: int,
                   order: int | None = None) -> np.ndarray:
    """Components of the single-axis contraction of A with B; result axes are
    [batch] + (A slots minus axis_a) + (B slots minus axis_b) (+ coeff)."""
    A, B, space = _promote(A, B)
    base = A._base
    ca = np.moveaxis(A.components, base + axis_a, -1 if space is None else -2)
    cb = np.moveaxis(B.components, base + axis_b, -1 if space is None else -2)
    fa = A.rank - 1
    fb = B.rank - 1
    for _ in range(fb):
        ca = np.expand_dims(ca, base + fa)
    for _ in range(fa):
        cb = np.expand_dims(cb, base)
    if space is None:
        return np.sum(ca * cb, axis=-1)
    prod = space.mul(ca, cb, order)
    return np.sum(prod, axis=-2)


def contract_with(A: TensorValue, B: TensorValue, slot_a: int, slot_b: int,
                  order: int | None = None) -> np.ndarray:
    """Raw-component contraction helper used by the geometry layer; slots are
    absolute slot positions (0-based over the uppers-first layout)."""
    return _contract_axes(A, B, slot_a, slot_b, order)


def metric_convert(T: TensorValue, slot: int, direction: str, metric: "MetricAtPoint",
                   order: int | None = None) -> TensorValue:
    """Raise or lower one slot with the metric.

    ``direction`` is "lower" (slot indexes the contravariant block; the new
    covariant index becomes the first lower slot) or "raise" (slot indexes the
    covariant block; the new contravariant index becomes the last upper slot).
    """
    if direction == "lower":
        if not 0 <= slot < T.p:
            raise SlotError(f"cannot lower slot {slot} of valence ({T.p},{T.q})")
        g = metric.g
        space = T.space or g.space
        batched = T.batched or g.batched
        base = 1 if batched else 0
        comps = _contract_axes(g, T, 1, slot, order)  # g_{a m} T^{.. m ..}
        # axes now: [batch] + (a,) + T-others (+ coeff); move 'a' to first covariant slot
        comps = np.moveaxis(comps, base, base + (T.p - 1))
        return TensorValue(T.dim, T.p - 1, T.q + 1, comps, space, batched)
    if direction == "raise":
        if not 0 <= slot < T.q:
            raise SlotError(f"cannot raise slot {slot} of valence ({T.p},{T.q})")
        ginv = metric.g_inv
        space = T.space or ginv.space
        batched = T.batched or ginv.batched
        base = 1 if batched else 0
        comps = _contract_axes(ginv, T, 1, T.p + slot, order)  # g^{a m} T_{.. m ..}
        comps = np.moveaxis(comps, base, base + T.p)  # append to upper block
        return TensorValue(T.dim, T.p + 1, T.q - 1, comps, space, batched)
    raise SlotError(f"direction must be 'raise' or 'lower', got {direction!r}")


# --------------------------------------------------------------------------
# metric data
# --------------------------------------------------------------------------


def inertia(sym: np.ndarray, tol_scale: float = 1e-12) -> int:
    """Count of negative eigenvalues of a symmetric matrix."""
    w = np.linalg.eigvalsh(0.5 * (sym + sym.T))
    return int(np.sum(w < -tol_scale * max(1.0, np.max(np.abs(w)))))


def invert_jet_matrix(space: JetSpace, G: np.ndarray, order: int | None = None) -> np.ndarray:
    """Inverse of a jet-valued square matrix, components (..., n, n, m).

    Seeds with the exact numeric inverse of the constant term, then Newton
    iterations X <- X (2I - G X); the error degree doubles each step, so
    ceil(log2(order+1)) steps reach exactness at the truncation order.
    """
    order = space.order if order is None else order
    G0 = G[..., 0]
    X0 = np.linalg.inv(G0)
    X = np.zeros_like(G)
    X[..., 0] = X0
    n = G.shape[-2]
    eye = np.zeros(G.shape[-3:])
    eye[..., 0] = np.eye(n)

    def mm(A, B):
        a = np.expand_dims(A, -2)       # (..., n, k, 1, m)
        b = np.expand_dims(B, -4)       # (..., 1, k, n, m)
        return np.sum(space.mul(a, b, order), axis=-3)

    steps = max(1, int(np.ceil(np.log2(order + 1)))) if order > 0 else 0
    for _ in range(steps):
        GX = mm(G, X)
        X = mm(X, 2 * eye - GX)
    return X


@dataclass
class MetricAtPoint:
    """Metric and its inverse at a point (or a batch of points), with the
    signature bookkeeping the indefinite checks need.

    Invariant: g . g_inv = identity within 1e-10 at the constant term, and
    det_g != 0 (the metric is non-degenerate)."""

    g: TensorValue
    g_inv: TensorValue
    index: int
    det_g: np.ndarray

    @classmethod
    def build(cls, g: TensorValue) -> "MetricAtPoint":
        comps = g.components
        if g.space is not None:
            ginv_comps = invert_jet_matrix(g.space, comps)
            g0 = comps[..., 0]
        else:
            ginv_comps = np.linalg.inv(comps)
            g0 = comps
        det = np.linalg.det(g0)
        if np.any(np.abs(det) < 1e-14):
            raise ValueError("degenerate metric (det g = 0)")
        if g.batched:
            nus = {inertia(g0[k]) for k in range(g0.shape[0])}
            if len(nus) != 1:
                raise ValueError(f"metric index is not constant over the sample set: {sorted(nus)}")
            nu = nus.pop()
        else:
            nu = inertia(g0)
        g_inv = TensorValue(g.dim, 2, 0, ginv_comps, g.space, g.batched)
        return cls(g=g, g_inv=g_inv, index=nu, det_g=det)
