import numpy as np
import pytest
import scipy.linalg

import repspect as rs


@pytest.fixture(scope="session")
def s3_table():
    return rs.enumerate_closure(rs.GroupSpec(kind="symmetric", n=3))


@pytest.fixture(scope="session")
def s4_table():
    return rs.enumerate_closure(rs.GroupSpec(kind="symmetric", n=4))


@pytest.fixture(scope="session")
def q8_table():
    return rs.enumerate_closure(rs.GroupSpec(kind="quaternion8"))


def cyclic_table(n):
    return rs.enumerate_closure(rs.GroupSpec(kind="cyclic", n=n))


def symmetric_table(n):
    return rs.enumerate_closure(rs.GroupSpec(kind="symmetric", n=n))


def brute_commutant(images, rcond=1e-10):
    """Independent oracle: nullspace of A -> mA - Am stacked over images.

    Builds the constraint matrix column by column from explicit basis
    matrices E_ij and delegates the nullspace to scipy; shares no code
    with the library path.
    """
    n = images[0].shape[0]
    blocks = []
    for m in images:
        rows = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n))
                e[i, j] = 1.0
                rows[:, i * n + j] = (m @ e - e @ m).reshape(-1)
        blocks.append(rows)
    return scipy.linalg.null_space(np.concatenate(blocks), rcond=rcond)


def span_columns(basis_matrices):
    """Stack matrices as columns of vectorized coordinates."""
    return np.stack([b.reshape(-1) for b in basis_matrices], axis=1)


def max_principal_angle(a_cols, b_cols):
    return float(np.max(scipy.linalg.subspace_angles(a_cols, b_cols)))


def random_unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)
