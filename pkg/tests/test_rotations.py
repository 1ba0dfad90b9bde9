import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rotorgym.rotations import (
    cross,
    euler_from_rotmat,
    matmul3,
    matTvec,
    matvec,
    quat_exp,
    quat_from_euler,
    quat_mul,
    quat_to_rotmat,
    random_rotation,
    rot_z,
    rotmat_from_euler,
    rotmat_to_quat,
    skew,
    vee,
)

finite = st.floats(-10, 10, allow_nan=False)
quats = arrays(float, 4, elements=st.floats(-1, 1)).filter(lambda q: np.linalg.norm(q) > 0.1)


@given(quats)
def test_rotation_matrix_is_proper(q):
    R = quat_to_rotmat(q / np.linalg.norm(q))
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) > 0


@given(quats)
def test_quaternion_round_trip(q):
    q = q / np.linalg.norm(q)
    back = rotmat_to_quat(quat_to_rotmat(q))
    # q and -q are the same rotation
    assert min(np.abs(back - q).max(), np.abs(back + q).max()) < 1e-9


@given(st.floats(-3.1, 3.1), st.floats(-1.5, 1.5), st.floats(-3.1, 3.1))
def test_euler_round_trip(r, p, y):
    rpy = np.array([r, p, y])
    np.testing.assert_allclose(euler_from_rotmat(rotmat_from_euler(rpy)), rpy, atol=1e-9)


def test_euler_order_is_yaw_pitch_roll():
    rpy = np.array([0.3, -0.2, 1.1])
    Rx = np.array([[1, 0, 0], [0, np.cos(0.3), -np.sin(0.3)], [0, np.sin(0.3), np.cos(0.3)]])
    Ry = np.array([[np.cos(-0.2), 0, np.sin(-0.2)], [0, 1, 0], [-np.sin(-0.2), 0, np.cos(-0.2)]])
    np.testing.assert_allclose(rotmat_from_euler(rpy), rot_z(1.1) @ Ry @ Rx, atol=1e-12)


@given(arrays(float, 3, elements=finite))
def test_skew_vee_inverse(v):
    np.testing.assert_array_equal(vee(skew(v)), v)
    np.testing.assert_allclose(skew(v) @ np.array([1.0, 2.0, 3.0]), np.cross(v, [1.0, 2.0, 3.0]), atol=1e-9)


@given(arrays(float, (5, 3), elements=finite), arrays(float, (5, 3), elements=finite))
def test_explicit_products_match_numpy(a, b):
    M = random_rotation(np.random.default_rng(0), 5)
    np.testing.assert_allclose(cross(a, b), np.cross(a, b), atol=1e-9)
    np.testing.assert_allclose(matvec(M, a), np.einsum("nij,nj->ni", M, a), atol=1e-9)
    np.testing.assert_allclose(matTvec(M, a), np.einsum("nji,nj->ni", M, a), atol=1e-9)
    np.testing.assert_allclose(matmul3(M, M), M @ M, atol=1e-12)


def test_row_results_do_not_depend_on_batch():
    rng = np.random.default_rng(1)
    M = random_rotation(rng, 32)
    v = rng.normal(size=(32, 3))
    full = matvec(M, v)
    for i in (0, 5, 31):
        assert np.array_equal(matvec(M[i:i + 1], v[i:i + 1])[0], full[i])


def test_quat_exp_composes_rotation():
    w = np.array([0.0, 0.0, np.pi / 2])
    q = quat_mul(np.array([1.0, 0, 0, 0]), quat_exp(w))
    np.testing.assert_allclose(quat_to_rotmat(q) @ [1, 0, 0], [0, 1, 0], atol=1e-12)
    np.testing.assert_allclose(quat_from_euler(np.array([0.0, 0.0, np.pi / 2])), q, atol=1e-12)
