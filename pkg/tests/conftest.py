import numpy as np
import pytest

from fellgeom.bundle import build_bundle
from fellgeom.groupoid import pair_groupoid
from fellgeom.representation import GeometryConfig, Representation
from fellgeom.specfile import build_geometry, dirac_matrix, load_two_point_spec


@pytest.fixture(scope="session")
def two_point_spec():
    return load_two_point_spec()


@pytest.fixture(scope="session")
def two_point(two_point_spec):
    config, rep = build_geometry(two_point_spec)
    return config, rep


@pytest.fixture(scope="session")
def two_point_rep(two_point):
    return two_point[1]


@pytest.fixture(scope="session")
def two_point_dirac(two_point_spec, two_point_rep):
    return dirac_matrix(two_point_spec, two_point_rep)


# the four morphism-field families of the two-point geometry, unit order
# (L, R, Lbar, Rbar); each takes its free complex parameters

def family_swap(m):
    return np.array(
        [[0, np.conj(m), 0, 0], [m, 0, 0, 0], [0, 0, 0, m], [0, 0, np.conj(m), 0]],
        dtype=complex,
    )


def family_conj(g, h):
    return np.array(
        [[0, 0, g, 0], [0, 0, 0, h], [np.conj(g), 0, 0, 0], [0, np.conj(h), 0, 0]],
        dtype=complex,
    )


def family_diag(w, z):
    return np.diag([w, z, np.conj(w), np.conj(z)]).astype(complex)


def family_cross(y):
    return np.array(
        [[0, 0, 0, y], [0, 0, y, 0], [0, np.conj(y), 0, 0], [np.conj(y), 0, 0, 0]],
        dtype=complex,
    )


def random_paired_geometry(rng, max_units=5, max_dim=2):
    """A random pair-groupoid geometry with a valid conjugation pairing."""
    k = int(rng.integers(1, max_units + 1))
    units = [f"u{i}" for i in range(k)]
    order = list(rng.permutation(k))
    conjugation = {}
    while order:
        a = order.pop()
        if order and rng.random() < 0.7:
            b = order.pop()
            conjugation[units[a]] = units[b]
            conjugation[units[b]] = units[a]
        else:
            conjugation[units[a]] = units[a]
    dims, chirality, sector = {}, {}, {}
    for u in units:
        v = conjugation[u]
        if u in dims:
            continue
        d = int(rng.integers(1, max_dim + 1))
        c = int(rng.choice([1, -1]))
        dims[u] = d
        chirality[u] = c
        if v != u:
            dims[v] = d
            chirality[v] = c
            sector[u] = "particle"
            sector[v] = "antiparticle"
        else:
            sector[u] = "particle"
    bundle = build_bundle(pair_groupoid(units), dims)
    config = GeometryConfig(
        bundle=bundle,
        chirality=chirality,
        sector=sector,
        conjugation=conjugation,
    )
    return config, Representation(config)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))
