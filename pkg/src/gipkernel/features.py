"""Polynomial lift of joint states and the monomial bases it induces.

The augmented vector is laid out as ``[q_c, q_s, q_p, dq_v, ddq]`` where
``q_c``/``q_s`` are cosines/sines of the revolute coordinates, ``q_p`` the
prismatic coordinates, and ``dq_v`` the products ``dq_i * dq_j`` for
``i <= j`` in lexicographic order.  Rigid-body torques are polynomials in this
vector, which :func:`certify_polynomial_dynamics` checks numerically.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import JointState, JointType, RobotModel, inverse_dynamics, parse_joint_types
from .errors import InvalidInputError

__all__ = [
    "AugmentedLayout",
    "AugmentedInput",
    "augment",
    "augmented_dim",
    "Convention",
    "MonomialSet",
    "enumerate_monomials",
    "count_monomials",
    "evaluate_monomials",
    "random_states",
    "certify_polynomial_dynamics",
    "CertificationReport",
    "PUBLISHED_MONOMIAL_COUNTS",
]

# reported for a 4-DOF SCARA and a 6-DOF all-revolute arm
PUBLISHED_MONOMIAL_COUNTS = {"RRPR": 1647, "RRRRRR": 302615}


def augmented_dim(joint_types) -> int:
    jt = parse_joint_types(joint_types)
    n = len(jt)
    n_r = sum(t is JointType.REVOLUTE for t in jt)
    return 2 * n_r + (n - n_r) + n * (n + 1) // 2 + n


@dataclass(frozen=True)
class AugmentedLayout:
    """Column ranges of each block inside the augmented vector."""

    joint_types: tuple

    def __post_init__(self):
        object.__setattr__(self, "joint_types", parse_joint_types(self.joint_types))
        if len(self.joint_types) < 1:
            raise InvalidInputError("at least one joint is required")

    @property
    def n(self):
        return len(self.joint_types)

    @property
    def revolute(self):
        return [i for i, t in enumerate(self.joint_types) if t is JointType.REVOLUTE]

    @property
    def prismatic(self):
        return [i for i, t in enumerate(self.joint_types) if t is JointType.PRISMATIC]

    @property
    def n_r(self):
        return len(self.revolute)

    @property
    def n_p(self):
        return self.n - self.n_r

    @property
    def n_v(self):
        return self.n * (self.n + 1) // 2

    @property
    def dim(self):
        return 2 * self.n_r + self.n_p + self.n_v + self.n

    @property
    def cos(self):
        return slice(0, self.n_r)

    @property
    def sin(self):
        return slice(self.n_r, 2 * self.n_r)

    @property
    def prism(self):
        return slice(2 * self.n_r, 2 * self.n_r + self.n_p)

    @property
    def vel(self):
        start = 2 * self.n_r + self.n_p
        return slice(start, start + self.n_v)

    @property
    def acc(self):
        start = 2 * self.n_r + self.n_p + self.n_v
        return slice(start, start + self.n)

    def cs_pair(self, b: int) -> list:
        """Columns ``[cos, sin]`` of the ``b``-th revolute joint."""
        return [b, self.n_r + b]

    def av_columns(self) -> list:
        """Columns of ``[ddq, dq_v]``, the block entering linearly."""
        return list(range(self.acc.start, self.acc.stop)) + list(range(self.vel.start, self.vel.stop))

    def velocity_pairs(self) -> list:
        return [(i, j) for i in range(self.n) for j in range(i, self.n)]

    def variable_names(self) -> list:
        names = [f"c{i + 1}" for i in self.revolute] + [f"s{i + 1}" for i in self.revolute]
        names += [f"p{i + 1}" for i in self.prismatic]
        names += [f"dq{i + 1}dq{j + 1}" for i, j in self.velocity_pairs()]
        names += [f"ddq{i + 1}" for i in range(self.n)]
        return names


@dataclass(frozen=True)
class AugmentedInput:
    q_c: np.ndarray
    q_s: np.ndarray
    q_p: np.ndarray
    dq_v: np.ndarray
    ddq: np.ndarray

    @property
    def q_cs(self) -> np.ndarray:
        return np.concatenate([self.q_c, self.q_s], axis=-1)

    @property
    def q_av(self) -> np.ndarray:
        return np.concatenate([self.ddq, self.dq_v], axis=-1)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q_c, self.q_s, self.q_p, self.dq_v, self.ddq], axis=-1)


def augment(state: JointState, joint_types) -> AugmentedInput:
    layout = AugmentedLayout(joint_types)
    if state.n != layout.n:
        raise InvalidInputError(f"state has {state.n} joints, joint_types has {layout.n}")
    q_r = state.q[..., layout.revolute]
    iu, ju = np.triu_indices(layout.n)
    return AugmentedInput(
        q_c=np.cos(q_r),
        q_s=np.sin(q_r),
        q_p=state.q[..., layout.prismatic],
        dq_v=state.dq[..., iu] * state.dq[..., ju],
        ddq=state.ddq.copy(),
    )


# ---------------------------------------------------------------------------
# monomials


class Convention(str, enum.Enum):
    """Degree constraints defining a monomial family.

    ``FULL``: position variables of degree <= 2, velocity products and
    accelerations of degree <= 1, total degree <= 2n + 1, and
    ``deg(c_b) + deg(s_b) <= 2`` for each revolute joint.

    ``GIP_RKHS``: the span of the GIP kernel, i.e. the above with at most one
    variable from ``[ddq, dq_v]`` per monomial.
    """

    FULL = "full"
    GIP_RKHS = "gip_rkhs"


@dataclass(frozen=True)
class MonomialSet:
    exponents: np.ndarray  # (M, dim), int8
    convention: Convention
    joint_types: tuple
    reduced: bool = False

    def __len__(self):
        return self.exponents.shape[0]

    @property
    def layout(self) -> AugmentedLayout:
        return AugmentedLayout(self.joint_types)

    def to_json(self) -> str:
        return json.dumps(
            {
                "convention": self.convention.value,
                "joint_types": "".join(t.letter for t in self.joint_types),
                "reduced": self.reduced,
                "variables": self.layout.variable_names(),
                "exponents": self.exponents.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MonomialSet":
        doc = json.loads(text)
        return cls(
            exponents=np.asarray(doc["exponents"], dtype=np.int8).reshape(-1, augmented_dim(doc["joint_types"])),
            convention=Convention(doc["convention"]),
            joint_types=parse_joint_types(doc["joint_types"]),
            reduced=bool(doc.get("reduced", False)),
        )

    def without(self, columns) -> "MonomialSet":
        """Drop every monomial that involves any of ``columns`` (indices or a slice)."""
        if isinstance(columns, slice):
            columns = range(self.exponents.shape[1])[columns]
        keep = ~np.any(self.exponents[:, list(columns)] > 0, axis=1)
        return MonomialSet(self.exponents[keep], self.convention, self.joint_types, self.reduced)


def _position_factors(layout: AugmentedLayout, reduced: bool = False):
    """Per-joint lists of partial exponent vectors for the position block."""
    dim = layout.dim
    factors = []
    for b in range(layout.n_r):
        c, s = layout.cs_pair(b)
        opts = []
        for dc in range(3):
            for ds in range(3 - dc):
                if reduced and ds == 2:
                    continue
                e = np.zeros(dim, dtype=np.int8)
                e[c], e[s] = dc, ds
                opts.append(e)
        factors.append(opts)
    for b in range(layout.n_p):
        col = layout.prism.start + b
        opts = []
        for dp in range(3):
            e = np.zeros(dim, dtype=np.int8)
            e[col] = dp
            opts.append(e)
        factors.append(opts)
    return factors


def _check_n(joint_types):
    jt = parse_joint_types(joint_types)
    if len(jt) < 1:
        raise InvalidInputError("n must be at least 1")
    return jt


def count_monomials(joint_types, convention=Convention.GIP_RKHS, reduced: bool = False) -> int:
    """Size of a monomial family without materializing it.

    Uses the degree generating polynomial of each variable group, so it is
    cheap even for families with billions of members.
    """
    layout = AugmentedLayout(_check_n(joint_types))
    convention = Convention(convention)
    gen = np.array([1], dtype=object)
    for _ in range(layout.n_r):
        gen = np.convolve(gen, np.array([1, 2, 2 if reduced else 3], dtype=object))
    for _ in range(layout.n_p):
        gen = np.convolve(gen, np.array([1, 1, 1], dtype=object))
    n_av = layout.n_v + layout.n
    if convention is Convention.GIP_RKHS:
        av = np.array([1, n_av], dtype=object)
    else:
        av = np.array([math.comb(n_av, k) for k in range(n_av + 1)], dtype=object)
    gen = np.convolve(gen, av)
    return int(sum(gen[: 2 * layout.n + 2]))


def enumerate_monomials(
    joint_types, convention=Convention.GIP_RKHS, max_size: int = 5_000_000, reduced: bool = False
) -> MonomialSet:
    """Materialize a monomial family as exponent vectors over the augmented input.

    Raises :class:`InvalidInputError` for ``n < 1`` or when the family is
    larger than ``max_size``; use :func:`count_monomials` for sizes only.
    """
    jt = _check_n(joint_types)
    layout = AugmentedLayout(jt)
    convention = Convention(convention)
    size = count_monomials(jt, convention, reduced)
    if size > max_size:
        raise InvalidInputError(f"{size} monomials exceed max_size={max_size}")
    factors = _position_factors(layout, reduced)
    positions = np.array([np.sum(combo, axis=0) for combo in itertools.product(*factors)], dtype=np.int8)
    if positions.ndim == 1:
        positions = positions.reshape(1, -1)
    av_cols = layout.av_columns()
    max_deg = 2 * layout.n + 1
    if convention is Convention.GIP_RKHS:
        subsets = [()] + [(c,) for c in av_cols]
    else:
        subsets = [s for k in range(len(av_cols) + 1) for s in itertools.combinations(av_cols, k)]
    blocks = []
    pos_deg = positions.sum(axis=1)
    for sub in subsets:
        ok = pos_deg + len(sub) <= max_deg
        if not np.any(ok):
            continue
        blk = positions[ok].copy()
        blk[:, list(sub)] = 1
        blocks.append(blk)
    exps = np.concatenate(blocks, axis=0)
    return MonomialSet(exps, convention, jt, reduced)


def evaluate_monomials(x, monomials: MonomialSet) -> np.ndarray:
    """Feature matrix ``phi[..., k] = prod_v x[..., v] ** e[k, v]``.

    ``x`` is an :class:`AugmentedInput` or its array form.
    """
    if isinstance(x, AugmentedInput):
        x = x.as_array()
    x = np.asarray(x, dtype=float)
    exps = monomials.exponents
    if x.shape[-1] != exps.shape[1]:
        raise InvalidInputError(f"input has {x.shape[-1]} variables, monomials use {exps.shape[1]}")
    out = np.ones(x.shape[:-1] + (exps.shape[0],))
    for v in range(exps.shape[1]):
        col = exps[:, v]
        for deg in np.unique(col[col > 0]):
            sel = col == deg
            out[..., sel] *= (x[..., v] ** int(deg))[..., None]
    return out


# ---------------------------------------------------------------------------
# certification


def random_states(joint_types, count: int, rng=None, vel_range=2.0, acc_range=2.0, prismatic_range=1.0) -> JointState:
    """Uniform random states: revolute q in [-pi, pi], prismatic q in [-1, 1] m."""
    jt = parse_joint_types(joint_types)
    rng = np.random.default_rng(rng)
    n = len(jt)
    lim = np.array([np.pi if t is JointType.REVOLUTE else prismatic_range for t in jt])
    q = rng.uniform(-1.0, 1.0, size=(count, n)) * lim
    dq = rng.uniform(-vel_range, vel_range, size=(count, n))
    ddq = rng.uniform(-acc_range, acc_range, size=(count, n))
    return JointState(q, dq, ddq)


@dataclass(frozen=True)
class CertificationReport:
    joint_index: int
    residual: float
    n_samples: int
    n_monomials: int
    rank: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance


def certify_polynomial_dynamics(
    model: RobotModel,
    samples: JointState,
    joint_index: int | None = None,
    monomials: MonomialSet | None = None,
    rcond: float = 1e-10,
    tolerance: float = 1e-8,
    oversampling: float = 1.5,
):
    """Fit noiseless joint torques onto monomials of the augmented input.

    The relative RMS residual of the least-squares fit is essentially zero
    iff the torque lies in the span of the monomials.  By default the reduced
    GIP basis is used.  It has full column rank, so one Householder QR of
    ``[features | torques]`` yields every joint's residual at once.  When the
    columns turn out rank deficient (e.g. a non-reduced set where
    ``c**2 + s**2 = 1`` makes columns dependent) a pivoted, rank-revealing
    least-squares solve with relative cutoff ``rcond`` is used instead.

    Returns a :class:`CertificationReport` for ``joint_index``, or a list
    with one report per joint when ``joint_index`` is None.  At least
    ``oversampling * len(monomials)`` samples are required.
    """
    if monomials is None:
        monomials = enumerate_monomials(model.joint_types, Convention.GIP_RKHS, reduced=True)
    if joint_index is not None and not 0 <= joint_index < model.n:
        raise InvalidInputError(f"joint_index {joint_index} out of range")
    if oversampling < 1:
        raise InvalidInputError("oversampling must be >= 1")
    n_samples, n_mono = len(samples), len(monomials)
    if n_samples < oversampling * n_mono:
        raise InvalidInputError(
            f"{n_samples} samples are too few for {n_mono} monomials (need {oversampling}x as many)"
        )
    joints = list(range(model.n)) if joint_index is None else [joint_index]
    tau = inverse_dynamics(model, samples)[:, joints]
    tau_norm = np.maximum(np.linalg.norm(tau, axis=0), np.finfo(float).tiny)
    aug = augment(samples, model.joint_types).as_array()

    work = np.empty((n_samples, n_mono + len(joints)))
    chunk = 2048
    for start in range(0, n_samples, chunk):
        rows = slice(start, start + chunk)
        work[rows, :n_mono] = evaluate_monomials(aug[rows], monomials)
    # column scaling keeps the rank cutoff meaningful across monomial magnitudes
    scale = np.sqrt(np.mean(work[:, :n_mono] ** 2, axis=0))
    scale[scale == 0] = 1.0
    work[:, :n_mono] /= scale
    work[:, n_mono:] = tau / tau_norm

    (R,) = scipy.linalg.qr(work, mode="r", overwrite_a=True, check_finite=False)
    diag = np.abs(np.diag(R)[:n_mono])
    if diag.size and diag.min() > rcond * diag.max():
        rank = n_mono
        rel = np.linalg.norm(R[n_mono:, n_mono:], axis=0)
    else:
        del R, work
        feats = evaluate_monomials(aug, monomials) / scale
        coef, _, rank, _ = scipy.linalg.lstsq(
            feats, tau, cond=rcond, lapack_driver="gelsy", overwrite_a=False, check_finite=False
        )
        rel = np.linalg.norm(tau - feats @ coef, axis=0) / tau_norm
    reports = [
        CertificationReport(j, float(r), n_samples, n_mono, int(rank), tolerance)
        for j, r in zip(joints, rel)
    ]
    return reports if joint_index is None else reports[0]
