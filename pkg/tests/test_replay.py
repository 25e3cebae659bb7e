import numpy as np
import pytest

from saginmm.replay import ReplayBuffer

FIELDS = {"state": 3, "action": 0, "reward": 0}


def filled(n, capacity=4):
    buf = ReplayBuffer(capacity, FIELDS)
    for k in range(n):
        buf.push(state=np.array([k, k + 0.5, -k]), action=k, reward=0.1 * k)
    return buf


def test_push_grows_until_capacity():
    buf = filled(3)
    assert len(buf) == 3
    rows = buf.rows_in_order()
    assert np.array_equal(rows["action"], [0, 1, 2])


def test_fifo_overwrite_drops_oldest():
    buf = filled(5, capacity=4)
    assert len(buf) == 4
    rows = buf.rows_in_order()
    assert np.array_equal(rows["action"], [1, 2, 3, 4])
    assert np.array_equal(rows["state"][0], [1, 1.5, -1])
    buf.push(state=np.zeros(3), action=9, reward=0.0)
    assert np.array_equal(buf.rows_in_order()["action"], [2, 3, 4, 9])


def test_capacity_never_exceeded():
    buf = filled(17, capacity=4)
    assert len(buf) == 4


def test_sample_without_replacement():
    buf = filled(4)
    rng = np.random.default_rng(0)
    for _ in range(50):
        batch = buf.sample(4, rng)
        assert sorted(batch["action"].tolist()) == [0, 1, 2, 3]
        assert batch["state"].shape == (4, 3)


def test_sample_is_uniform():
    buf = filled(4)
    rng = np.random.default_rng(1)
    counts = np.zeros(4)
    for _ in range(4000):
        counts[int(buf.sample(1, rng)["action"][0])] += 1
    assert np.all(np.abs(counts / 4000 - 0.25) < 0.03)


def test_sample_larger_than_stored_rejected():
    buf = filled(2)
    with pytest.raises(ValueError):
        buf.sample(3, np.random.default_rng(0))


def test_push_column_mismatch_rejected():
    buf = ReplayBuffer(4, FIELDS)
    with pytest.raises(ValueError):
        buf.push(state=np.zeros(3), action=1)
    with pytest.raises(ValueError):
        buf.push(state=np.zeros(3), action=1, reward=0.0, extra=2)


def test_zero_capacity_rejected():
    with pytest.raises(ValueError):
        ReplayBuffer(0, FIELDS)


def test_state_roundtrip_preserves_order_and_cursor():
    buf = filled(6, capacity=4)
    arrays = buf.state_arrays("buf")
    meta = buf.state_meta()

    clone = ReplayBuffer(4, FIELDS)
    clone.load_state(meta, arrays, "buf")
    assert len(clone) == len(buf)
    assert clone.cursor == buf.cursor
    a, b = buf.rows_in_order(), clone.rows_in_order()
    assert all(np.array_equal(a[k], b[k]) for k in FIELDS)
    # identical sampling stream after restore
    s1 = buf.sample(3, np.random.default_rng(5))
    s2 = clone.sample(3, np.random.default_rng(5))
    assert all(np.array_equal(s1[k], s2[k]) for k in FIELDS)


def test_load_state_capacity_mismatch():
    buf = filled(4)
    other = ReplayBuffer(8, FIELDS)
    with pytest.raises(ValueError):
        other.load_state(buf.state_meta(), buf.state_arrays("b"), "b")
