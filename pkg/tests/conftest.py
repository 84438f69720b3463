import pytest

from fredholm_lattice.operator import ProblemSpec

EXAMPLE_F = "piecewise(t < 1/2 -> t^4/6, else -> t^3/5)"
EXAMPLE_K = "4*t^7*sin(pi/2*s)^9"


def example_spec(**changes):
    spec = ProblemSpec.from_strings(EXAMPLE_F, EXAMPLE_K, a=0.0, b=1.0, lam=0.2,
                                    kappa=2.0, mu=0.2, rho=4.0)
    return spec.with_(**changes) if changes else spec


def constant_spec(**changes):
    """K = 1, f = 1, lam = 1/2 on [0, 1]; the solution is the constant 2."""
    spec = ProblemSpec.from_strings("1", "1", a=0.0, b=1.0, lam=0.5, kappa=4.0, mu=1.0, rho=1.0)
    return spec.with_(**changes) if changes else spec


def separable_spec(**changes):
    """K = t*s, f = t, lam = 1/2 on [0, 1]; the continuum solution is 6t/5."""
    spec = ProblemSpec.from_strings("t", "t*s", a=0.0, b=1.0, lam=0.5, kappa=2.0, mu=1.0, rho=1.0)
    return spec.with_(**changes) if changes else spec


def separable_discrete(t, h, lam=0.5):
    """Trapezoid fixed point of the t*s problem: c = h-rule of s^2 = 1/3 + h^2/6."""
    return t / (1 - lam * (1 / 3 + h * h / 6))


@pytest.fixture
def example():
    return example_spec()
