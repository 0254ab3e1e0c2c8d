import os

import django
import numpy as np
import pytest

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'macsense.settings')
django.setup()

from macsense.channel import build_example1, build_example2  # noqa: E402
from macsense.scheme import Example2SchemeParams, assemble_joint, build_example2_scheme  # noqa: E402


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))


@pytest.fixture(scope='session')
def example2():
    return build_example2(0.9, 0.2)


@pytest.fixture(scope='session')
def example1():
    return build_example1(0.3)


@pytest.fixture(scope='session')
def corollary_joint(example2):
    scheme = build_example2_scheme(Example2SchemeParams.corollary_min_d2(), example2)
    return assemble_joint(example2, scheme)


@pytest.fixture(scope='session')
def theorem_joint(example2):
    scheme = build_example2_scheme(Example2SchemeParams.theorem_min_d2(0.1), example2)
    return assemble_joint(example2, scheme)
