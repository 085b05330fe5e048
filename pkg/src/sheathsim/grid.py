"""Finite-volume grids on [0, L], uniform or geometrically refined toward x=0."""

from dataclasses import dataclass, field

import numpy as np

MIN_CELLS = 16


@dataclass(frozen=True)
class Grid1D:
    """Cell-edge description of a 1-D finite-volume mesh.

    Edges are strictly increasing, start at 0 and end at the domain length.
    Centers and widths are derived and cached.
    """

    x_edges: np.ndarray
    centers: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.x_edges, dtype=float)
        if edges.ndim != 1 or edges.size < MIN_CELLS + 1:
            raise ValueError(f"grid needs at least {MIN_CELLS} cells")
        if edges[0] != 0.0:
            raise ValueError("grid must start at x = 0")
        widths = np.diff(edges)
        if np.any(widths <= 0.0):
            raise ValueError("grid edges must be strictly increasing")
        object.__setattr__(self, "x_edges", edges)
        object.__setattr__(self, "centers", 0.5 * (edges[:-1] + edges[1:]))
        object.__setattr__(self, "widths", widths)

    @property
    def n_cells(self) -> int:
        return self.widths.size

    @property
    def length(self) -> float:
        return float(self.x_edges[-1])

    @classmethod
    def uniform(cls, length: float, cells: int) -> "Grid1D":
        if length <= 0.0:
            raise ValueError("domain length must be positive")
        return cls(np.linspace(0.0, length, cells + 1))

    @classmethod
    def graded(cls, length: float, first_width: float, ratio: float,
               interior_width: float) -> "Grid1D":
        """Geometric refinement toward x=0, uniform interior cells elsewhere.

        Cell widths grow by `ratio` from `first_width` until they reach
        `interior_width`; the remaining length is filled with uniform cells no
        wider than `interior_width`.  The last interior width is adjusted so the
        edges end exactly at `length`.
        """
        if length <= 0.0:
            raise ValueError("domain length must be positive")
        if not 1.0 < ratio <= 1.2:
            raise ValueError("grading ratio must lie in (1, 1.2]")
        if not 0.0 < first_width <= interior_width:
            raise ValueError("first cell width must lie in (0, interior_width]")
        widths = []
        w = first_width
        total = 0.0
        while w < interior_width and total + w < length:
            widths.append(w)
            total += w
            w *= ratio
        remaining = length - total
        n_uniform = max(int(np.ceil(remaining / interior_width)), 1)
        widths.extend([remaining / n_uniform] * n_uniform)
        while len(widths) < MIN_CELLS:
            # tiny domains: split the uniform tail until the cell floor is met
            widths[-1] /= 2.0
            widths.append(widths[-1])
        edges = np.concatenate(([0.0], np.cumsum(widths)))
        edges[-1] = length
        return cls(edges)
