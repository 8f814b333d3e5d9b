import hypothesis.strategies as st
from hypothesis import settings

from kscompete.model import ModelParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def log_uniform(lo: float, hi: float):
    return st.floats(lo, hi).map(lambda e: 10.0**e)


@st.composite
def valid_params(draw, L_range=(-0.5, 1.0)):
    """Parameters with a positive equilibrium."""
    return ModelParams(
        d1=draw(log_uniform(-1, 1)),
        d2=draw(log_uniform(-1.5, 1)),
        chi=0.0,
        xi=draw(st.floats(0.0, 3.0)),
        mu1=draw(log_uniform(-0.5, 0.5)),
        mu2=draw(log_uniform(-0.5, 0.5)),
        a1=draw(st.floats(0.0, 0.9)),
        a2=draw(st.floats(0.0, 0.9)),
        lam=draw(log_uniform(-1, 1)),
        L=draw(log_uniform(*L_range)),
    )
