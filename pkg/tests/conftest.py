"""
Shared model fixtures.

The default model has lengths [1, 2], psi_1(v) = e^{0.1 v},
psi_2(v) = (1 + e^{0.2 v}) / 2, gamma_1 = exponential(theta=1),
gamma_2 = cos(tau), and a parametric PC sequence with sigma = [1, 2], rho = 0.5.
"""

from pathlib import Path

import numpy as np
import pytest

from pcls.core import PCLSModel
from pcls.kernels.excov import LaplaceMixture
from pcls.kernels.pc_component import PCSequenceSpec
from pcls.kernels.stationary import CosineMixture, Exponential, SquaredExp
from pcls.partition import Partition

SPECS_DIR = Path(__file__).resolve().parent.parent / "specs"


def make_default_model(**overrides) -> PCLSModel:
    kwargs = dict(
        partition=Partition([1.0, 2.0]),
        psi=[LaplaceMixture([1.0], [0.1]), LaplaceMixture([0.5, 0.5], [0.0, 0.2])],
        gamma=[Exponential(theta=1.0), CosineMixture(masses=(1.0,), frequencies=(1.0,))],
        pcseq=PCSequenceSpec.parametric([1.0, 2.0], 0.5),
    )
    kwargs.update(overrides)
    return PCLSModel(**kwargs)


def random_gamma(rng):
    """One of the three stationary families with random parameters."""
    family = int(rng.integers(3))
    if family == 0:
        return Exponential(theta=float(rng.uniform(0.3, 3.0)), sigma2=float(rng.uniform(0.5, 2.0)))
    if family == 1:
        return SquaredExp(length=float(rng.uniform(0.3, 3.0)), sigma2=float(rng.uniform(0.5, 2.0)))
    return CosineMixture(masses=tuple(float(m) for m in rng.uniform(0.1, 1.0, 2)),
                         frequencies=tuple(float(f) for f in rng.uniform(0.1, 3.0, 2)))


def make_random_model(rng, **overrides) -> PCLSModel:
    """A random model with one to three blocks per period."""
    T = int(rng.integers(1, 4))
    psi = []
    for _ in range(T):
        n = int(rng.integers(1, 4))
        rates = rng.choice(np.linspace(-0.3, 0.3, 13), size=n, replace=False)
        psi.append(LaplaceMixture(rng.uniform(0.1, 2.0, n), rates))
    kwargs = dict(
        partition=Partition(rng.uniform(0.3, 2.0, T)),
        psi=psi,
        gamma=[random_gamma(rng) for _ in range(T)],
        pcseq=PCSequenceSpec.parametric(rng.uniform(0.5, 2.0, T), float(rng.uniform(-0.9, 0.9))),
    )
    kwargs.update(overrides)
    return PCLSModel(**kwargs)


@pytest.fixture
def default_model():
    """The shipped full default model."""
    return make_default_model()


@pytest.fixture
def ls_only_model():
    """LS-only model with atomic (cosine) spectra."""
    return make_default_model(
        gamma=[CosineMixture(masses=(0.6, 0.4), frequencies=(0.5, 2.0)),
               CosineMixture(masses=(1.0,), frequencies=(1.0,))],
        pcseq=None,
        include_pc=False,
    )


@pytest.fixture
def pc_only_model():
    """PC-only model with sigma = [1, 2], rho = 0.5."""
    return PCLSModel(
        partition=Partition([1.0, 2.0]),
        pcseq=PCSequenceSpec.parametric([1.0, 2.0], 0.5),
        include_ls=False,
    )


@pytest.fixture
def specs_dir():
    return SPECS_DIR
