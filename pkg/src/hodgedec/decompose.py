"""Three-component orthogonal decomposition of 1-cochains and images.

A 1-cochain V on the full grid splits, relative to a foreground mask, as

    V = P_n^T D_{0,n} W_n  +  P_t^T S_{1,t}^{-1} D_{1,t}^T S_{2,t} W_t  +  residual

where the potentials solve the (rank-deficient, consistent) SPD systems

    L_{0,n} W_n = D_{0,n}^T S_{1,n} V_n        (curl-free part)
    L_{2,t} W_t = S_{2,t} D_{1,t} V_t          (divergence-free part)

with conjugate gradients from a zero start, whose limit is the
minimal-norm solution — a reproducible gauge for the otherwise
non-unique potentials.  The residual is harmonic up to solver tolerance.
The 'big' variant (all stars replaced by the identity) is the default;
'hodge' keeps the diagonal stars.

`decomposed_image` chains segmentation, field generation, edge averaging,
the decomposition, and cube averaging into the stacked multi-channel
tensor: 3m channels, spatial extents dims-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import InvalidInputError, SolverError
from .fields import (
    CubeField,
    channel_pair_fields,
    flow_field,
    gradient_field,
    patch_topology_field,
    to_cube_field,
    to_one_form,
)
from .grid import Cochain, GridComplex, build_grid
from .manifold import (
    SupportSet,
    VertexMask,
    build_support,
    default_threshold,
    restricted_derivative,
    restricted_star,
    segment,
)

SOLVER_TOL = 1e-10
FIELD_METHODS = ("gradient", "flow", "channel-pair", "patch")

# Components with norm below this fraction of the input are reported as
# orthogonal outright: their direction is solver noise, not signal.
NEGLIGIBLE_COMPONENT = 1e-8

#: luma weights for collapsing color images to one scalar field
LUMA = np.array([0.299, 0.587, 0.114])


@dataclass
class SolveInfo:
    iterations: int
    residual: float
    rhs_norm: float
    unknowns: int


@dataclass
class DecompositionResult:
    """The three components (full-grid 1-cochains), potentials, diagnostics."""

    omega1: Cochain  # exact-normal (curl-free)
    omega2: Cochain  # coexact-tangential (divergence-free)
    omega3: Cochain  # harmonic residual
    w_normal: np.ndarray
    w_tangential: np.ndarray
    diagnostics: dict[str, Any] = dc_field(default_factory=dict)

    def components(self) -> tuple[Cochain, Cochain, Cochain]:
        return self.omega1, self.omega2, self.omega3


@dataclass
class DecomposedImage:
    """Per-component cube fields and the stacked channel tensor."""

    components: list[CubeField]
    tensor: np.ndarray  # (3m * n_fields, *(dims - 1))
    diagnostics: dict[str, Any] = dc_field(default_factory=dict)


# Right-hand sides below this fraction of the input norm are rounding
# noise from exact cancellations (e.g. the curl of a gradient); the
# corresponding potential is zero at working precision.
RHS_NOISE_FLOOR = 1e-13


def _cg_minimum_norm(
    L: sp.csr_matrix, rhs: np.ndarray, tol: float, maxiter: int | None, floor: float = 0.0
) -> tuple[np.ndarray, SolveInfo]:
    n = L.shape[0]
    rhs_norm = float(np.linalg.norm(rhs)) if n else 0.0
    if n == 0 or rhs_norm <= floor:
        return np.zeros(n), SolveInfo(0, rhs_norm, rhs_norm, n)
    if maxiter is None:
        maxiter = 10 * n
    count = [0]

    def _tick(_xk):
        count[0] += 1

    x, flag = sla.cg(L, rhs, rtol=tol, atol=floor, maxiter=maxiter, callback=_tick)
    residual = float(np.linalg.norm(L @ x - rhs))
    if flag != 0 and residual > max(tol * rhs_norm, floor):
        raise SolverError(
            f"conjugate gradients stalled after {count[0]} iterations "
            f"(relative residual {residual / rhs_norm:.3e})",
            iterations=count[0],
            residual=residual,
        )
    return x, SolveInfo(count[0], residual, rhs_norm, n)


def _star_diag(g: GridComplex, s: SupportSet, k: int, variant: str) -> np.ndarray | None:
    if variant == "big":
        return None
    return restricted_star(g, s, k).diagonal()


def solve_potential_normal(
    V: Cochain,
    g: GridComplex,
    supports: SupportSet,
    variant: str = "big",
    tol: float = SOLVER_TOL,
    maxiter: int | None = None,
) -> tuple[np.ndarray, SolveInfo]:
    """Minimal-norm W_n with L_{k-1,n} W_n = D_{k-1,n}^T S_{k,n} V_n."""
    if supports.condition != "normal":
        raise InvalidInputError("normal potential needs the normal support")
    k = V.degree
    Vn = supports.projection(k) @ V.values if V.support == "full" else V.values
    D = restricted_derivative(g, supports, k - 1)
    s_here = _star_diag(g, supports, k, variant)
    rhs = D.T @ (Vn if s_here is None else s_here * Vn)
    L = _restricted_laplacian(g, supports, k - 1, variant)
    floor = RHS_NOISE_FLOOR * float(np.linalg.norm(Vn))
    return _cg_minimum_norm(L, rhs, tol, maxiter, floor)


def solve_potential_tangential(
    V: Cochain,
    g: GridComplex,
    supports: SupportSet,
    variant: str = "big",
    tol: float = SOLVER_TOL,
    maxiter: int | None = None,
) -> tuple[np.ndarray, SolveInfo]:
    """Minimal-norm W_t with L_{k+1,t} W_t = S_{k+1,t} D_{k,t} V_t."""
    if supports.condition != "tangential":
        raise InvalidInputError("tangential potential needs the tangential support")
    k = V.degree
    Vt = supports.projection(k) @ V.values if V.support == "full" else V.values
    D = restricted_derivative(g, supports, k)
    s_next = _star_diag(g, supports, k + 1, variant)
    rhs = D @ Vt
    if s_next is not None:
        rhs = s_next * rhs
    L = _restricted_laplacian(g, supports, k + 1, variant)
    floor = RHS_NOISE_FLOOR * float(np.linalg.norm(Vt))
    return _cg_minimum_norm(L, rhs, tol, maxiter, floor)


def _restricted_laplacian(g, s, k, variant):
    from .laplacian import assemble

    return assemble(g, s, k, variant).matrix


def _inner(u: np.ndarray, v: np.ndarray, weight: np.ndarray | None) -> float:
    return float(u @ v) if weight is None else float(u @ (weight * v))


def hodge_decompose(
    V: Cochain,
    g: GridComplex,
    mask: VertexMask,
    variant: str = "big",
    tol: float = SOLVER_TOL,
    maxiter: int | None = None,
    supports: tuple[SupportSet, SupportSet] | None = None,
) -> DecompositionResult:
    """Split a full-grid 1-cochain into curl-free + divergence-free + harmonic.

    The first two components are zero-extended from their supports back to
    the full edge set; the third is the exact reconstruction residual.
    """
    if V.degree != 1 or V.support != "full":
        raise InvalidInputError("decomposition expects a degree-1 cochain on the full grid")
    if V.values.size != g.num_cells(1):
        raise InvalidInputError("cochain length does not match the grid's edge count")
    if supports is None:
        sn = build_support(g, mask, "normal")
        st = build_support(g, mask, "tangential")
    else:
        sn, st = supports
        if sn.condition != "normal" or st.condition != "tangential":
            raise InvalidInputError("supports must be (normal, tangential)")

    Wn, info_n = solve_potential_normal(V, g, sn, variant, tol, maxiter)
    Wt, info_t = solve_potential_tangential(V, g, st, variant, tol, maxiter)

    w1 = sn.projection(1).T @ (restricted_derivative(g, sn, 0) @ Wn)
    if variant == "hodge":
        s2 = restricted_star(g, st, 2).diagonal()
        s1_inv = 1.0 / restricted_star(g, st, 1).diagonal()
        delta_t = s1_inv * (restricted_derivative(g, st, 1).T @ (s2 * Wt))
    else:
        delta_t = restricted_derivative(g, st, 1).T @ Wt
    w2 = st.projection(1).T @ delta_t
    w3 = V.values - w1 - w2

    weight = None
    if variant == "hodge":
        weight = g.hodge_star(1).diagonal()
    comps = [w1, w2, w3]
    norms = [float(np.sqrt(_inner(c, c, weight))) for c in comps]
    v_norm = float(np.sqrt(_inner(V.values, V.values, weight)))
    floor = NEGLIGIBLE_COMPONENT * v_norm
    ortho = {}
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        if norms[i] <= floor or norms[j] <= floor:
            ortho[f"w{i+1}w{j+1}"] = 0.0
        else:
            ortho[f"w{i+1}w{j+1}"] = abs(
                _inner(comps[i], comps[j], weight)
            ) / (norms[i] * norms[j])

    diagnostics = {
        "variant": variant,
        "solve_normal": info_n,
        "solve_tangential": info_t,
        "support_sizes_normal": sn.sizes(),
        "support_sizes_tangential": st.sizes(),
        "component_norms": norms,
        "input_norm": v_norm,
        "orthogonality": ortho,
        "max_orthogonality": max(ortho.values()),
        "empty_mask": mask.is_empty,
    }
    return DecompositionResult(
        Cochain(1, "full", w1),
        Cochain(1, "full", w2),
        Cochain(1, "full", w3),
        Wn,
        Wt,
        diagnostics,
    )


def to_luminance(image: np.ndarray) -> np.ndarray:
    """Collapse a (3, H, W) color image to its luma; pass scalars through."""
    if image.ndim == 3 and image.shape[0] == 3:
        return np.tensordot(LUMA, image.astype(np.float64), axes=([0], [0]))
    return np.asarray(image, dtype=np.float64)


def decomposed_image(
    image: np.ndarray,
    field_method: str = "gradient",
    params: dict[str, Any] | None = None,
    variant: str = "big",
    threshold: float | None = None,
    tol: float = SOLVER_TOL,
    maxiter: int | None = None,
    color: bool | None = None,
) -> DecomposedImage:
    """Full pipeline for one image: the stacked decomposed-channel tensor.

    2D grayscale or color inputs give 6 channels (18 with channel-pair),
    3D volumes give 9; spatial extents shrink to dims-1 (cube centers).
    Channel order per field: curl-free m-block, divergence-free m-block,
    harmonic m-block.  Color images are (3, H, W); a 3-d array whose first
    extent is 3 is treated as color unless `color=False`.
    """
    image = np.asarray(image)
    params = dict(params or {})
    if image.ndim not in (2, 3):
        raise InvalidInputError(f"unsupported image shape {image.shape}")
    if color is None:
        color = image.ndim == 3 and image.shape[0] == 3
    if color and (image.ndim != 3 or image.shape[0] != 3):
        raise InvalidInputError(f"color images must be (3, H, W), got {image.shape}")
    if threshold is None:
        threshold = params.get("threshold")
    if threshold is None and field_method != "patch":
        threshold = default_threshold(image)

    if field_method == "channel-pair":
        if not color:
            raise InvalidInputError("channel-pair method needs a (3, H, W) color image")
        scalar = to_luminance(image)
        fields = list(channel_pair_fields(image))
    else:
        scalar = to_luminance(image) if color else np.asarray(image, dtype=np.float64)
        if field_method == "gradient":
            fields = [gradient_field(scalar, int(params.get("s", 1)), int(params.get("t", 1)))]
        elif field_method == "flow":
            fields = [flow_field(scalar, params.get("direction", "descend"))]
        elif field_method == "patch":
            f = patch_topology_field(
                scalar, int(params.get("patch_edge", 4)),
                params.get("patch_threshold", default_threshold(image)),
            )
            fields = [f]
            # foreground on the coarse grid: patches with any component at all
            scalar = f.components[0]
            if threshold is None:
                threshold = 0.5
        else:
            raise InvalidInputError(
                f"unknown field method {field_method!r}; use one of {FIELD_METHODS}"
            )

    g = build_grid(scalar.shape)
    mask = segment(scalar, threshold)
    sn = build_support(g, mask, "normal")
    st = build_support(g, mask, "tangential")

    blocks: list[np.ndarray] = []
    cube_fields: list[CubeField] = []
    diags: list[dict[str, Any]] = []
    for f in fields:
        omega = to_one_form(f, g)
        result = hodge_decompose(
            omega, g, mask, variant, tol, maxiter, supports=(sn, st)
        )
        for comp in result.components():
            cf = to_cube_field(comp, g)
            cube_fields.append(cf)
            blocks.append(cf.components)
        diags.append(result.diagnostics)
    tensor = np.concatenate(blocks, axis=0)
    return DecomposedImage(
        cube_fields,
        tensor,
        {
            "field_method": field_method,
            "threshold": float(threshold) if np.isfinite(threshold) else "inf",
            "per_field": diags,
            "mask_vertices": mask.count,
        },
    )
