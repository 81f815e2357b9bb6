from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Disc:
    """Closed disc ``|z - center| <= radius`` in the complex plane."""

    center: complex
    radius: float

    def contains(self, z, margin: float = 0.0):
        return np.abs(np.asarray(z) - self.center) <= self.radius - margin

    @property
    def area(self) -> float:
        return float(np.pi * self.radius**2)

    def grid(self, size: int, boundary: int = 0) -> np.ndarray:
        """Cartesian ``size x size`` grid clipped to the disc, optionally
        augmented with ``boundary`` equispaced points on the circle."""
        t = np.linspace(-self.radius, self.radius, size)
        x, y = np.meshgrid(t, t)
        pts = (x + 1j * y).ravel()
        pts = pts[np.abs(pts) <= self.radius] + self.center
        if boundary:
            theta = 2 * np.pi * np.arange(boundary) / boundary
            pts = np.concatenate([pts, self.center + self.radius * np.exp(1j * theta)])
        return pts
