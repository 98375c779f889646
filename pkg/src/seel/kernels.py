"""Compact-support kernel densities, their CDFs and the scaled smoother.

The CDFs are stored as explicit polynomial antiderivatives rather than
numeric integrals, which keeps inner loops cheap and bit-reproducible.
"""

import numpy as np

from .errors import NonpositiveBandwidthError

KERNEL_NAMES = ("epanechnikov", "quartic", "triweight")


class Kernel:
    """Symmetric kernel density on [-1, 1] selected by name.

    Supported variants: "epanechnikov" (3/4)(1-u^2), "quartic"
    (15/16)(1-u^2)^2 and "triweight" (35/32)(1-u^2)^3.  All methods accept
    scalars or numpy arrays and vanish outside the support.
    """

    def __init__(self, name="epanechnikov"):
        name = str(name).lower()
        if name not in KERNEL_NAMES:
            raise ValueError(f"unknown kernel {name!r}; choose from {KERNEL_NAMES}")
        self.name = name

    def __repr__(self):
        return f"Kernel({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, Kernel) and other.name == self.name

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) <= 1.0
        t = 1.0 - u * u
        if self.name == "epanechnikov":
            val = 0.75 * t
        elif self.name == "quartic":
            val = (15.0 / 16.0) * t * t
        else:
            val = (35.0 / 32.0) * t * t * t
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        v = np.clip(u, -1.0, 1.0)
        if self.name == "epanechnikov":
            out = 0.25 * (2.0 + 3.0 * v - v ** 3)
        elif self.name == "quartic":
            out = 0.5 + (15.0 / 16.0) * (v - (2.0 / 3.0) * v ** 3 + 0.2 * v ** 5)
        else:
            out = 0.5 + (35.0 / 32.0) * (v - v ** 3 + 0.6 * v ** 5 - v ** 7 / 7.0)
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def pdf_prime(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) < 1.0
        t = 1.0 - u * u
        if self.name == "epanechnikov":
            val = -1.5 * u
        elif self.name == "quartic":
            val = -3.75 * u * t
        else:
            val = -(105.0 / 16.0) * u * t * t
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)

    def smoothed_indicator(self, h, x):
        """G(x/h): differentiable surrogate for the indicator of x > 0.

        Equals 1 for x >= h and 0 for x <= -h.
        """
        if h <= 0.0:
            raise NonpositiveBandwidthError("bandwidth h must be positive")
        return self.cdf(np.asarray(x, dtype=float) / h)


def kernel_pdf(kernel, u):
    return kernel.pdf(u)


def kernel_cdf(kernel, u):
    return kernel.cdf(u)


def kernel_pdf_derivative(kernel, u):
    return kernel.pdf_prime(u)


def smoothed_indicator(kernel, h, x):
    return kernel.smoothed_indicator(h, x)
