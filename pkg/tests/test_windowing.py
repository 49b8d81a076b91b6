import io

import pytest

from flightcast.domain import Trajectory, Waypoint
from flightcast.windowing import (
    INPUT_LENGTH,
    check_continuity,
    default_stride,
    read_windows_jsonl,
    sample_windows,
    write_windows_jsonl,
)

from conftest import gap_seeded_trajectory


def minute_trajectory(minutes, callsign="T") -> Trajectory:
    """Waypoints at the given minute marks (gaps where minutes skip)."""
    return Trajectory(
        callsign,
        tuple(Waypoint(60 * m, 10.0, 20.0, 10000.0, 900.0, 90.0) for m in minutes),
    )


def brute_force_offsets(traj: Trajectory, horizon: int, stride: int) -> list[int]:
    """Independent enumerator: try every offset in order, apply continuity
    and stride arithmetic."""
    size = INPUT_LENGTH + horizon
    ts = [w.timestamp for w in traj.waypoints]
    offsets = []
    next_allowed = 0
    for k in range(len(ts) - size + 1):
        if k < next_allowed:
            continue
        if all(ts[i + 1] - ts[i] == 60 for i in range(k, k + size - 1)):
            offsets.append(k)
            next_allowed = k + stride
    return offsets


class TestCheckContinuity:
    def test_continuous(self):
        traj = minute_trajectory([0, 1, 2])
        assert check_continuity(traj.waypoints)

    def test_one_second_off(self):
        wps = (Waypoint(0, 0, 0, 0, 0, 0), Waypoint(60, 0, 0, 0, 0, 0), Waypoint(121, 0, 0, 0, 0, 0))
        assert not check_continuity(wps)

    def test_singleton(self):
        assert check_continuity([Waypoint(60, 0, 0, 0, 0, 0)])


class TestSampleWindows:
    def test_41_minutes_stride_18(self):
        traj = minute_trajectory(range(41))
        windows = sample_windows(traj, 1, 18)
        assert len(windows) == 2
        assert [w.inputs[0].timestamp for w in windows] == [0, 18 * 60]

    def test_too_short_trajectory(self):
        traj = minute_trajectory(range(16))
        assert sample_windows(traj, 1, 18) == []

    def test_gap_never_spanned(self):
        # 34 minutes of flight with minutes 21 and 22 missing.
        minutes = list(range(21)) + list(range(23, 34))
        traj = minute_trajectory(minutes)
        windows = sample_windows(traj, 4, 21)
        assert len(windows) == 1
        assert windows[0].inputs[0].timestamp == 0
        for w in windows:
            assert check_continuity(w.waypoints())

    def test_stride_too_small(self):
        traj = minute_trajectory(range(40))
        with pytest.raises(ValueError, match="stride too small"):
            sample_windows(traj, 4, 19)

    def test_unsupported_horizon(self):
        traj = minute_trajectory(range(40))
        with pytest.raises(ValueError, match="unsupported horizon"):
            sample_windows(traj, 3, 40)
        assert sample_windows(traj, 3, 40, allow_any_horizon=True)

    def test_default_stride_is_window_plus_one(self):
        assert default_stride(1) == 18
        assert default_stride(8) == 25

    def test_window_shape(self):
        traj = minute_trajectory(range(30))
        (window,) = sample_windows(traj, 8, 25)
        assert len(window.inputs) == INPUT_LENGTH
        assert len(window.targets) == 8
        assert window.horizon == 8
        assert window.targets[0].timestamp - window.inputs[-1].timestamp == 60

    def test_matches_brute_force_on_gap_seeded_trajectories(self, rng):
        for _ in range(60):
            traj = gap_seeded_trajectory(rng)
            for horizon in (1, 4, 8):
                stride = int(rng.integers(INPUT_LENGTH + horizon, INPUT_LENGTH + horizon + 10))
                windows = sample_windows(traj, horizon, stride)
                offsets = brute_force_offsets(traj, horizon, stride)
                got = [w.inputs[0].timestamp for w in windows]
                want = [traj.waypoints[k].timestamp for k in offsets]
                assert got == want
                for w in windows:
                    assert check_continuity(w.waypoints())

    def test_no_shared_waypoints_at_minimal_stride(self, rng):
        for _ in range(30):
            traj = gap_seeded_trajectory(rng)
            for horizon in (1, 4, 8):
                windows = sample_windows(traj, horizon, INPUT_LENGTH + horizon)
                seen = set()
                for w in windows:
                    stamps = {p.timestamp for p in w.waypoints()}
                    assert not (stamps & seen)
                    seen |= stamps


class TestJsonLines:
    def test_round_trip(self, rng):
        traj = gap_seeded_trajectory(rng)
        windows = sample_windows(traj, 4, 21)
        buf = io.StringIO()
        write_windows_jsonl(windows, buf)
        back = read_windows_jsonl(io.StringIO(buf.getvalue()))
        assert back == windows

    def test_schema_fields(self, rng):
        import json

        windows = sample_windows(minute_trajectory(range(20)), 4, 21)
        buf = io.StringIO()
        write_windows_jsonl(windows, buf)
        obj = json.loads(buf.getvalue().splitlines()[0])
        assert set(obj) == {"callsign", "horizon", "input", "target"}
        assert len(obj["input"]) == 16
        assert len(obj["target"]) == 4
        assert len(obj["input"][0]) == 6  # t, lon, lat, alt, vel, hdg
