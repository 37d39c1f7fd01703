"""Nonlinear least squares over SE(3) variables.

Variables are ego poses, object poses, and inter-frame object motions.
Factors penalize the logarithm of an error transform; the solver is
Levenberg-Marquardt with right-multiplicative updates x <- x * exp(delta)
and analytic Jacobians.  Marginalization removes variables via the Schur
complement of the linearized system, leaving a prior factor over the
removed variables' Markov blanket.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .geometry import (
    Pose,
    se3_adjoint,
    se3_exp,
    se3_inv,
    se3_log,
    se3_right_jacobian_inv,
)

# Problems with at most this many scalar dimensions use a dense Cholesky
# solve; larger ones go through SuperLU on the sparse normal equations.
_DENSE_DIM_LIMIT = 360

_GRAD_TOL = 1e-10
_ABS_OBJECTIVE_FLOOR = 1e-30
_LAMBDA_MAX = 1e12


class GraphError(RuntimeError):
    pass


class RankDeficientError(GraphError):
    """Normal equations are rank deficient (e.g. no anchor prior)."""

    def __init__(self, variables, message=None):
        self.variables = tuple(variables)
        super().__init__(message or f"under-constrained variables: {self.variables}")


class NonPositiveSemidefiniteError(GraphError):
    """A factor's information matrix is not symmetric PSD."""


class VarKind(Enum):
    EGO_POSE = "EgoPose"
    OBJECT_POSE = "ObjectPose"
    OBJECT_MOTION = "ObjectMotion"


@dataclass(frozen=True)
class VariableId:
    kind: VarKind
    frame: int
    object_id: Optional[int] = None

    def __post_init__(self):
        if self.kind is VarKind.EGO_POSE and self.object_id is not None:
            raise ValueError("ego pose variables carry no object id")
        if self.kind is not VarKind.EGO_POSE and self.object_id is None:
            raise ValueError(f"{self.kind.value} variables require an object id")

    def _key(self):
        return (self.frame, self.kind.value, -1 if self.object_id is None else self.object_id)

    def __lt__(self, other: "VariableId"):
        return self._key() < other._key()

    def __str__(self):
        if self.object_id is None:
            return f"{self.kind.value}:{self.frame}"
        return f"{self.kind.value}:{self.frame}:{self.object_id}"


class FactorKind(Enum):
    ODOMETRY = "Odometry"
    OBSERVATION = "Observation"
    MOTION = "Motion"
    CONST_VELOCITY = "ConstVelocity"
    LOOP = "Loop"
    MARGINAL_PRIOR = "MarginalPrior"


_ARITY = {
    FactorKind.ODOMETRY: 2,
    FactorKind.OBSERVATION: 2,
    FactorKind.MOTION: 3,
    FactorKind.CONST_VELOCITY: 2,
    FactorKind.LOOP: 2,
}

# Kinds whose error transform is inv(a) @ b @ inv(measurement).
_PAIR_KINDS = (FactorKind.ODOMETRY, FactorKind.OBSERVATION, FactorKind.CONST_VELOCITY, FactorKind.LOOP)


def _check_information(info, dim):
    info = np.asarray(info, dtype=float)
    if info.shape != (dim, dim):
        raise ValueError(f"information must be {dim}x{dim}, got {info.shape}")
    if not np.allclose(info, info.T, atol=1e-12):
        raise NonPositiveSemidefiniteError("information matrix is not symmetric")
    eigs = np.linalg.eigvalsh(info)
    if eigs[0] < -1e-9 * max(1.0, eigs[-1]):
        raise NonPositiveSemidefiniteError("information matrix has negative eigenvalues")
    return info


@dataclass(eq=False)
class Factor:
    """One constraint over an ordered tuple of variables.

    `measurement` is a 4x4 transform for odometry / observation / motion /
    loop factors and None otherwise.  For MARGINAL_PRIOR factors,
    `information` and `gradient` hold the Schur-reduced (H, b) of the
    absorbed constraints, and `lin_points` the linearization values.
    """

    kind: FactorKind
    variables: tuple
    measurement: Optional[np.ndarray] = None
    information: Optional[np.ndarray] = None
    gradient: Optional[np.ndarray] = None
    lin_points: Optional[dict] = None

    def __post_init__(self):
        self.variables = tuple(self.variables)
        if self.kind is FactorKind.MARGINAL_PRIOR:
            if len(self.variables) < 1:
                raise ValueError("marginal prior needs at least one variable")
            dim = 6 * len(self.variables)
            self.information = _check_information(self.information, dim)
            self.gradient = np.zeros(dim) if self.gradient is None else np.asarray(self.gradient, dtype=float).reshape(dim)
            if self.lin_points is None or set(self.lin_points) != set(self.variables):
                raise ValueError("marginal prior needs a linearization point per variable")
            self.lin_points = {v: np.asarray(m, dtype=float) for v, m in self.lin_points.items()}
            return
        if len(self.variables) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind.value} factor takes {_ARITY[self.kind]} variables")
        if self.kind is FactorKind.CONST_VELOCITY:
            if self.measurement is not None:
                raise ValueError("constant-velocity factors carry no measurement")
        else:
            if self.measurement is None:
                raise ValueError(f"{self.kind.value} factor needs a measurement")
            self.measurement = np.asarray(
                self.measurement.matrix() if isinstance(self.measurement, Pose) else self.measurement, dtype=float
            )
        self.information = _check_information(self.information, 6)


def diagonal_information(rot_weight: float, trans_weight: float) -> np.ndarray:
    return np.diag([rot_weight] * 3 + [trans_weight] * 3).astype(float)


def anchor_prior(vid: VariableId, pose: Pose, weight: float = 1e8) -> Factor:
    """Prior pinning one variable at a fixed pose (gauge anchor)."""
    return Factor(
        kind=FactorKind.MARGINAL_PRIOR,
        variables=(vid,),
        information=np.eye(6) * weight,
        gradient=np.zeros(6),
        lin_points={vid: pose.matrix()},
    )


class Graph:
    """Estimates keyed by VariableId plus the factors constraining them."""

    def __init__(self):
        self.variables: dict[VariableId, np.ndarray] = {}
        self.factors: list[Factor] = []

    def add_variable(self, vid: VariableId, pose: Pose | np.ndarray):
        if vid in self.variables:
            raise ValueError(f"duplicate variable {vid}")
        self.variables[vid] = np.asarray(pose.matrix() if isinstance(pose, Pose) else pose, dtype=float)

    def set_value(self, vid: VariableId, pose: Pose | np.ndarray):
        if vid not in self.variables:
            raise KeyError(vid)
        self.variables[vid] = np.asarray(pose.matrix() if isinstance(pose, Pose) else pose, dtype=float)

    def get_pose(self, vid: VariableId) -> Pose:
        return Pose.from_matrix(self.variables[vid])

    def add_factor(self, factor: Factor):
        for vid in factor.variables:
            if vid not in self.variables:
                raise ValueError(f"factor references unknown variable {vid}")
        self.factors.append(factor)

    def copy(self) -> "Graph":
        out = Graph()
        out.variables = {v: m.copy() for v, m in self.variables.items()}
        out.factors = list(self.factors)
        return out

    def objective(self) -> float:
        prep = _prepare(self.factors, _ordering_index(sorted(self.variables)))
        vals = np.stack([self.variables[v] for v in sorted(self.variables)]) if self.variables else np.zeros((0, 4, 4))
        return _evaluate_cost(vals, prep)

    def dump_edges(self) -> str:
        """Text edge list: kind, variable ids, 12-float measurement, information diagonal."""
        lines = []
        for f in self.factors:
            vids = ";".join(str(v) for v in f.variables)
            if f.measurement is not None:
                meas = " ".join(f"{x:.9g}" for x in f.measurement[:3, :].reshape(12))
            else:
                meas = "-"
            diag = " ".join(f"{x:.9g}" for x in np.diag(f.information))
            lines.append(f"{f.kind.value} {vids} {meas} {diag}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Residuals


def _pose_mat(p) -> np.ndarray:
    return p.matrix() if isinstance(p, Pose) else np.asarray(p, dtype=float)


def residual_odometry(x_prev: Pose, x_cur: Pose, t_meas: Pose) -> np.ndarray:
    """Twist of (x_prev^-1 x_cur) t_meas^-1; zero iff the step matches."""
    err = se3_inv(_pose_mat(x_prev)) @ _pose_mat(x_cur) @ se3_inv(_pose_mat(t_meas))
    return se3_log(err)


def residual_observation(x: Pose, b_world: Pose, b_local_meas: Pose) -> np.ndarray:
    """Twist of (x^-1 b_world) b_local_meas^-1; zero iff b_world = x * b_local_meas."""
    err = se3_inv(_pose_mat(x)) @ _pose_mat(b_world) @ se3_inv(_pose_mat(b_local_meas))
    return se3_log(err)


def residual_motion(b_prev: Pose, b_cur: Pose, c: Pose) -> np.ndarray:
    """Twist of (b_prev^-1 b_cur) c^-1; zero iff c is the inter-frame motion."""
    err = se3_inv(_pose_mat(b_prev)) @ _pose_mat(b_cur) @ se3_inv(_pose_mat(c))
    return se3_log(err)


def residual_const_velocity(c_prev: Pose, c_cur: Pose) -> np.ndarray:
    """Twist of c_prev^-1 c_cur; zero iff consecutive motions are equal."""
    return se3_log(se3_inv(_pose_mat(c_prev)) @ _pose_mat(c_cur))


def residual_loop(x_old: Pose, x_new: Pose, t_loop: Pose) -> np.ndarray:
    """Same functional form as the odometry residual, over distant frames."""
    return residual_odometry(x_old, x_new, t_loop)


def linearize_factor(factor: Factor, values: dict) -> tuple[np.ndarray, list[np.ndarray]]:
    """Residual and per-variable Jacobians w.r.t. right-multiplied twists.

    Reference (scalar) path; the solver evaluates factor groups batched and
    is tested to agree with this function.
    """
    mats = [values[v] for v in factor.variables]
    if factor.kind is FactorKind.MOTION:
        b_prev, b_cur, c = mats
        err = se3_inv(b_prev) @ b_cur @ se3_inv(c)
        r = se3_log(err)
        jri = se3_right_jacobian_inv(r)
        ad_c = se3_adjoint(c)
        j_prev = -jri @ se3_adjoint(se3_inv(err))
        j_cur = jri @ ad_c
        j_c = -jri @ ad_c
        return r, [j_prev, j_cur, j_c]
    if factor.kind in _PAIR_KINDS:
        a, b = mats
        meas = np.eye(4) if factor.measurement is None else factor.measurement
        err = se3_inv(a) @ b @ se3_inv(meas)
        r = se3_log(err)
        jri = se3_right_jacobian_inv(r)
        j_a = -jri @ se3_adjoint(se3_inv(err))
        j_b = jri @ se3_adjoint(meas)
        return r, [j_a, j_b]
    if factor.kind is FactorKind.MARGINAL_PRIOR:
        deltas = [se3_log(se3_inv(factor.lin_points[v]) @ values[v]) for v in factor.variables]
        jacs = [se3_right_jacobian_inv(d) for d in deltas]
        return np.concatenate(deltas), jacs
    raise ValueError(f"unknown factor kind {factor.kind}")


# ---------------------------------------------------------------------------
# Batched linearization


def _ordering_index(order: list) -> dict:
    return {vid: i for i, vid in enumerate(order)}


@dataclass
class _Prepared:
    pair_idx: np.ndarray  # (n, 2) variable slots
    pair_meas: np.ndarray  # (n, 4, 4)
    pair_info: np.ndarray  # (n, 6, 6)
    motion_idx: np.ndarray  # (m, 3)
    motion_info: np.ndarray  # (m, 6, 6)
    priors: list  # (slots array, lin mats (k,4,4), H, b)


def _prepare(factors: Iterable[Factor], index: dict) -> _Prepared:
    pair_idx, pair_meas, pair_info = [], [], []
    motion_idx, motion_info = [], []
    priors = []
    for f in factors:
        if f.kind in _PAIR_KINDS:
            pair_idx.append([index[f.variables[0]], index[f.variables[1]]])
            pair_meas.append(np.eye(4) if f.measurement is None else f.measurement)
            pair_info.append(f.information)
        elif f.kind is FactorKind.MOTION:
            motion_idx.append([index[v] for v in f.variables])
            motion_info.append(f.information)
        elif f.kind is FactorKind.MARGINAL_PRIOR:
            slots = np.array([index[v] for v in f.variables], dtype=int)
            lin = np.stack([f.lin_points[v] for v in f.variables])
            priors.append((slots, lin, f.information, f.gradient))
        else:  # pragma: no cover
            raise ValueError(f.kind)
    return _Prepared(
        pair_idx=np.array(pair_idx, dtype=int).reshape(-1, 2),
        pair_meas=np.stack(pair_meas) if pair_meas else np.zeros((0, 4, 4)),
        pair_info=np.stack(pair_info) if pair_info else np.zeros((0, 6, 6)),
        motion_idx=np.array(motion_idx, dtype=int).reshape(-1, 3),
        motion_info=np.stack(motion_info) if motion_info else np.zeros((0, 6, 6)),
        priors=priors,
    )


def _pair_errors(vals, prep):
    a = vals[prep.pair_idx[:, 0]]
    b = vals[prep.pair_idx[:, 1]]
    return se3_inv(a) @ b @ se3_inv(prep.pair_meas)


def _motion_errors(vals, prep):
    b_prev = vals[prep.motion_idx[:, 0]]
    b_cur = vals[prep.motion_idx[:, 1]]
    c = vals[prep.motion_idx[:, 2]]
    return se3_inv(b_prev) @ b_cur @ se3_inv(c), c


def _prior_deltas(vals, slots, lin):
    return se3_log(se3_inv(lin) @ vals[slots])


def _evaluate_cost(vals, prep) -> float:
    cost = 0.0
    if len(prep.pair_idx):
        r = se3_log(_pair_errors(vals, prep))
        cost += 0.5 * float(np.einsum("ni,nij,nj->", r, prep.pair_info, r))
    if len(prep.motion_idx):
        err, _ = _motion_errors(vals, prep)
        r = se3_log(err)
        cost += 0.5 * float(np.einsum("ni,nij,nj->", r, prep.motion_info, r))
    for slots, lin, h, b in prep.priors:
        d = _prior_deltas(vals, slots, lin).reshape(-1)
        cost += 0.5 * float(d @ h @ d) + float(b @ d)
    return cost


def _evaluate_system(vals, prep, dim):
    """Gauss-Newton H, gradient g, and cost at the current values."""
    rows, cols, data = [], [], []
    g = np.zeros(dim)
    cost = 0.0

    def scatter(slot_a, slot_b, block):
        # block: (n, 6, 6) contribution H[slot_a, slot_b].
        r = (slot_a[:, None, None] * 6 + np.arange(6)[None, :, None]) * np.ones((1, 1, 6), dtype=int)
        c = (slot_b[:, None, None] * 6 + np.arange(6)[None, None, :]) * np.ones((1, 6, 1), dtype=int)
        rows.append(r.reshape(-1))
        cols.append(c.reshape(-1))
        data.append(block.reshape(-1))

    def accumulate(slots, jacs, info, r):
        nonlocal cost, g
        cost_term = 0.5 * np.einsum("ni,nij,nj->", r, info, r)
        info_r = np.einsum("nij,nj->ni", info, r)
        for a, ja in zip(slots, jacs):
            ga = np.einsum("nji,nj->ni", ja, info_r)
            np.add.at(g.reshape(-1, 6), a, ga)
            for b, jb in zip(slots, jacs):
                block = np.einsum("nji,njk,nkl->nil", ja, info, jb)
                scatter(a, b, block)
        return float(cost_term)

    if len(prep.pair_idx):
        err = _pair_errors(vals, prep)
        r = se3_log(err)
        jri = se3_right_jacobian_inv(r)
        j_a = -jri @ se3_adjoint(se3_inv(err))
        j_b = jri @ se3_adjoint(prep.pair_meas)
        cost += accumulate([prep.pair_idx[:, 0], prep.pair_idx[:, 1]], [j_a, j_b], prep.pair_info, r)

    if len(prep.motion_idx):
        err, c = _motion_errors(vals, prep)
        r = se3_log(err)
        jri = se3_right_jacobian_inv(r)
        ad_c = se3_adjoint(c)
        j_prev = -jri @ se3_adjoint(se3_inv(err))
        j_cur = jri @ ad_c
        j_c = -jri @ ad_c
        cost += accumulate(
            [prep.motion_idx[:, 0], prep.motion_idx[:, 1], prep.motion_idx[:, 2]],
            [j_prev, j_cur, j_c],
            prep.motion_info,
            r,
        )

    for slots, lin, h, b in prep.priors:
        d = _prior_deltas(vals, slots, lin)
        k = len(slots)
        gmat = np.zeros((6 * k, 6 * k))
        for i in range(k):
            gmat[6 * i : 6 * i + 6, 6 * i : 6 * i + 6] = se3_right_jacobian_inv(d[i])
        dflat = d.reshape(-1)
        cost += 0.5 * float(dflat @ h @ dflat) + float(b @ dflat)
        grad = gmat.T @ (h @ dflat + b)
        hmat = gmat.T @ h @ gmat
        for i, slot in enumerate(slots):
            g[6 * slot : 6 * slot + 6] += grad[6 * i : 6 * i + 6]
            for j, slot_b in enumerate(slots):
                rr, cc = np.meshgrid(
                    np.arange(6 * slot, 6 * slot + 6), np.arange(6 * slot_b, 6 * slot_b + 6), indexing="ij"
                )
                rows.append(rr.reshape(-1))
                cols.append(cc.reshape(-1))
                data.append(hmat[6 * i : 6 * i + 6, 6 * j : 6 * j + 6].reshape(-1))

    if rows:
        h_coo = scipy.sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )
    else:
        h_coo = scipy.sparse.coo_matrix((dim, dim))
    return h_coo, g, cost


def _solve_damped(h_coo, g, lam, dim):
    diag = h_coo.tocsr().diagonal()
    damp = lam * np.maximum(diag, 1e-12)
    if dim <= _DENSE_DIM_LIMIT:
        h = h_coo.toarray()
        h[np.arange(dim), np.arange(dim)] += damp
        try:
            cf = scipy.linalg.cho_factor(h, check_finite=False)
            return scipy.linalg.cho_solve(cf, -g, check_finite=False)
        except scipy.linalg.LinAlgError:
            return None
    h = (h_coo.tocsc() + scipy.sparse.diags(damp)).tocsc()
    try:
        lu = scipy.sparse.linalg.splu(h)
        delta = lu.solve(-g)
    except RuntimeError:
        return None
    if not np.all(np.isfinite(delta)):
        return None
    return delta


def _check_gauge(graph: Graph):
    """Every factor-connected component must contain a prior."""
    parent = {v: v for v in graph.variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    anchored_roots = set()
    for f in graph.factors:
        for v in f.variables[1:]:
            union(f.variables[0], v)
    for f in graph.factors:
        if f.kind is FactorKind.MARGINAL_PRIOR:
            anchored_roots.add(find(f.variables[0]))
    loose = [v for v in sorted(graph.variables) if find(v) not in anchored_roots]
    if loose:
        raise RankDeficientError(loose, f"graph has no prior anchoring: {[str(v) for v in loose[:8]]}")


@dataclass
class OptimReport:
    initial_objective: float
    final_objective: float
    iterations: int
    termination: str  # converged | max_iters | stalled

    def __str__(self):
        return (
            f"objective {self.initial_objective:.6g} -> {self.final_objective:.6g} "
            f"in {self.iterations} it ({self.termination})"
        )


def optimize(graph: Graph, max_iters: int = 25, rel_tol: float = 1e-9) -> OptimReport:
    """Levenberg-Marquardt on the graph, updating estimates in place.

    The objective never increases across accepted steps.  Raises
    RankDeficientError when the problem has unanchored gauge freedom.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    _check_gauge(graph)
    order = sorted(graph.variables)
    index = _ordering_index(order)
    dim = 6 * len(order)
    prep = _prepare(graph.factors, index)
    vals = np.stack([graph.variables[v] for v in order]) if order else np.zeros((0, 4, 4))

    cost = _evaluate_cost(vals, prep)
    initial = cost
    if not np.isfinite(cost):
        raise GraphError("objective is not finite at the current estimate")

    lam = 1e-6
    termination = "max_iters"
    accepted = 0
    for _ in range(max_iters):
        if abs(cost) < _ABS_OBJECTIVE_FLOOR:
            termination = "converged"
            break
        h_coo, g, cost = _evaluate_system(vals, prep, dim)
        if np.linalg.norm(g, ord=np.inf) < _GRAD_TOL:
            termination = "converged"
            break
        stepped = False
        while lam <= _LAMBDA_MAX:
            delta = _solve_damped(h_coo, g, lam, dim)
            if delta is None:
                lam *= 10.0
                continue
            cand = vals @ se3_exp(delta.reshape(-1, 6))
            cand_cost = _evaluate_cost(cand, prep)
            if np.isfinite(cand_cost) and cand_cost <= cost:
                drop = cost - cand_cost
                vals = cand
                cost = cand_cost
                lam = max(lam / 3.0, 1e-12)
                accepted += 1
                stepped = True
                if drop < rel_tol * max(abs(cost), _ABS_OBJECTIVE_FLOOR):
                    termination = "converged"
                break
            lam *= 10.0
        if not stepped:
            termination = "stalled"
            break
        if termination == "converged":
            break

    for i, vid in enumerate(order):
        graph.variables[vid] = vals[i]
    return OptimReport(initial_objective=initial, final_objective=cost, iterations=accepted, termination=termination)


@dataclass
class MarginalizeReport:
    victims: tuple
    blanket: tuple
    damped: bool = False


def marginalize(graph: Graph, victims, damping: float = 1e-8) -> MarginalizeReport:
    """Remove variables, folding their constraints into a prior factor.

    Absorbed factors are linearized at the current estimates; the Schur
    complement of the victim block yields the retained-variable prior, so
    the linearized information restricted to kept variables is preserved.
    A singular victim block is damped by `damping` * I and reported.
    """
    victims = set(victims)
    unknown = victims - set(graph.variables)
    if unknown:
        raise ValueError(f"cannot marginalize unknown variables: {sorted(unknown)}")

    absorbed = [f for f in graph.factors if any(v in victims for v in f.variables)]
    blanket = sorted({v for f in absorbed for v in f.variables} - victims)
    victim_order = sorted(victims)
    order = victim_order + blanket
    index = _ordering_index(order)
    dim = 6 * len(order)
    prep = _prepare(absorbed, index)
    vals = np.stack([graph.variables[v] for v in order])
    h_coo, g, _ = _evaluate_system(vals, prep, dim)
    h = h_coo.toarray()
    h = 0.5 * (h + h.T)

    nv = 6 * len(victim_order)
    hvv = h[:nv, :nv]
    damped = False
    try:
        np.linalg.cholesky(hvv + np.eye(nv) * 1e-14)
    except np.linalg.LinAlgError:
        damped = True
    if damped:
        hvv = hvv + np.eye(nv) * damping
    hvm = h[:nv, nv:]
    hmm = h[nv:, nv:]
    gv = g[:nv]
    gm = g[nv:]
    try:
        solve_vv = np.linalg.solve(hvv, np.hstack([hvm, gv[:, None]]))
    except np.linalg.LinAlgError:
        hvv = hvv + np.eye(nv) * damping
        damped = True
        solve_vv = np.linalg.solve(hvv, np.hstack([hvm, gv[:, None]]))
    h_new = hmm - hvm.T @ solve_vv[:, :-1]
    b_new = gm - hvm.T @ solve_vv[:, -1]
    h_new = 0.5 * (h_new + h_new.T)
    # Numerical floor: clip tiny negative eigenvalues out of the Schur result.
    eigs, vecs = np.linalg.eigh(h_new)
    if len(eigs) and eigs[0] < 0:
        h_new = (vecs * np.clip(eigs, 0.0, None)) @ vecs.T
        h_new = 0.5 * (h_new + h_new.T)

    graph.factors = [f for f in graph.factors if f not in absorbed]
    for v in victims:
        del graph.variables[v]
    if blanket:
        graph.add_factor(
            Factor(
                kind=FactorKind.MARGINAL_PRIOR,
                variables=tuple(blanket),
                information=h_new,
                gradient=b_new,
                lin_points={v: graph.variables[v].copy() for v in blanket},
            )
        )
    return MarginalizeReport(victims=tuple(victim_order), blanket=tuple(blanket), damped=damped)
