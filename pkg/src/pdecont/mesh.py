"""Structured triangulations of axis-aligned rectangles.

Nodes live on a uniform (nx+1) x (ny+1) grid over (-lx,lx) x (-ly,ly),
stored row-major by y then x.  Every grid cell is split along the
lower-left -> upper-right diagonal so that opposite boundary sides carry
identical node layouts (needed for periodic identification).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# boundary segment labels
SEG_BOTTOM, SEG_RIGHT, SEG_TOP, SEG_LEFT = 1, 2, 3, 4


class MeshError(ValueError):
    pass


@dataclass
class Mesh:
    points: np.ndarray       # (np, 2) node coordinates
    triangles: np.ndarray    # (nt, 3) node indices, positively oriented
    tri_region: np.ndarray   # (nt,) region label
    edges: np.ndarray        # (ne, 2) boundary node pairs, ccw
    edge_seg: np.ndarray     # (ne,) segment id in {1,2,3,4}
    edge_s: np.ndarray       # (ne, 2) arclength positions of endpoints on the side
    lx: float
    ly: float
    nx: int
    ny: int

    @property
    def npoints(self) -> int:
        return self.points.shape[0]

    @property
    def ntri(self) -> int:
        return self.triangles.shape[0]

    _areas: np.ndarray | None = field(default=None, repr=False, compare=False)
    _grads: np.ndarray | None = field(default=None, repr=False, compare=False)

    def tri_areas(self) -> np.ndarray:
        """Signed triangle areas (positive for valid meshes)."""
        if self._areas is None:
            p = self.points
            a, b, c = (p[self.triangles[:, k]] for k in range(3))
            u, v = b - a, c - a
            self._areas = 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
        return self._areas

    def tri_grads(self) -> np.ndarray:
        """Gradients of the three P1 hat functions per triangle, shape (nt, 3, 2)."""
        if self._grads is None:
            p = self.points
            a, b, c = (p[self.triangles[:, k]] for k in range(3))
            area2 = 2.0 * self.tri_areas()[:, None]
            g = np.empty((self.ntri, 3, 2))
            # grad of hat at vertex i is perpendicular to the opposite edge
            for i, (q, r) in enumerate(((b, c), (c, a), (a, b))):
                e = r - q
                g[:, i, 0] = -e[:, 1]
                g[:, i, 1] = e[:, 0]
            g /= area2[:, :, None] if area2.ndim == 3 else area2[:, None]
            self._grads = g
        return self._grads


def build_rect_mesh(lx: float, ly: float, nx: int, ny: int) -> Mesh:
    """Uniform triangulation of (-lx,lx) x (-ly,ly) with nx x ny cells."""
    if lx <= 0 or ly <= 0:
        raise MeshError(f"rectangle half-widths must be positive, got {lx}, {ly}")
    if nx < 1 or ny < 1:
        raise MeshError(f"grid subdivisions must be >= 1, got {nx}, {ny}")

    xs = np.linspace(-lx, lx, nx + 1)
    ys = np.linspace(-ly, ly, ny + 1)
    X, Y = np.meshgrid(xs, ys)           # row-major by y then x
    points = np.column_stack([X.ravel(), Y.ravel()])

    def nid(ix, iy):
        return iy * (nx + 1) + ix

    tris = []
    for iy in range(ny):
        for ix in range(nx):
            n00 = nid(ix, iy)
            n10 = nid(ix + 1, iy)
            n01 = nid(ix, iy + 1)
            n11 = nid(ix + 1, iy + 1)
            tris.append((n00, n10, n11))
            tris.append((n00, n11, n01))
    triangles = np.array(tris, dtype=np.int64)

    edges, segs, svals = [], [], []
    # counterclockwise from bottom-left corner
    for ix in range(nx):                                   # bottom, left to right
        edges.append((nid(ix, 0), nid(ix + 1, 0)))
        segs.append(SEG_BOTTOM)
        svals.append((xs[ix] + lx, xs[ix + 1] + lx))
    for iy in range(ny):                                   # right, bottom to top
        edges.append((nid(nx, iy), nid(nx, iy + 1)))
        segs.append(SEG_RIGHT)
        svals.append((ys[iy] + ly, ys[iy + 1] + ly))
    for ix in range(nx, 0, -1):                            # top, right to left
        edges.append((nid(ix, ny), nid(ix - 1, ny)))
        segs.append(SEG_TOP)
        svals.append((lx - xs[ix], lx - xs[ix - 1]))
    for iy in range(ny, 0, -1):                            # left, top to bottom
        edges.append((nid(0, iy), nid(0, iy - 1)))
        segs.append(SEG_LEFT)
        svals.append((ly - ys[iy], ly - ys[iy - 1]))

    return Mesh(
        points=points,
        triangles=triangles,
        tri_region=np.ones(len(tris), dtype=np.int64),
        edges=np.array(edges, dtype=np.int64),
        edge_seg=np.array(segs, dtype=np.int64),
        edge_s=np.array(svals),
        lx=float(lx), ly=float(ly), nx=int(nx), ny=int(ny),
    )


def node_to_triangle(mesh: Mesh, v: np.ndarray, neq: int = 1) -> np.ndarray:
    """Interpolate a component-blocked nodal field to triangle values.

    Returns shape (ntri,) for neq=1, else (neq, ntri); the triangle value is
    the arithmetic mean of the three vertex values.
    """
    v = np.asarray(v, dtype=float)
    n = mesh.npoints
    if v.shape != (neq * n,):
        raise MeshError(f"field has length {v.size}, expected {neq * n}")
    out = np.empty((neq, mesh.ntri))
    for k in range(neq):
        comp = v[k * n:(k + 1) * n]
        out[k] = comp[mesh.triangles].mean(axis=1)
    return out[0] if neq == 1 else out
