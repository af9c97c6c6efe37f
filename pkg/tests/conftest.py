import pytest

from kamdea.types import KamConfig, Sample


@pytest.fixture
def ab_sample():
    """A(2; 7) and B(10; 7.1): B spends five times the input for 0.1 more output."""
    return Sample.from_arrays([[2.0], [10.0]], [[7.0], [7.1]], ids=["A", "B"],
                              input_names=("in",), output_names=("out",))


@pytest.fixture
def default_config():
    return KamConfig()


def random_sample(rng, n, m=1, p=1, low=1.0, high=10.0):
    X = rng.uniform(low, high, size=(n, m))
    Y = rng.uniform(low, high, size=(n, p))
    return Sample.from_arrays(X, Y)
