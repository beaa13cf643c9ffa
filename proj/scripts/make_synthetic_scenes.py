#!/usr/bin/env python3
"""Generate the bundled synthetic pedestrian scene files under data/.

Real ETH/UCY annotation files are not redistributed here; these stand-ins
mimic their format (frame, ped_id, x, y rows at 0.4 s sampling when read with
--stride 10) and their rough motion statistics. The hotel-scale file is sized
so that 8+12 windowing yields exactly 1597 sequences, matching the scale the
pipeline is tuned for.
"""

import argparse
import numpy as np

DT = 0.4
FRAME_STEP = 10
WINDOW = 20

SCENES = {
    # name: (target window count, speed mean, turn-rate std)
    "hotel": (1597, 1.10, 0.030),
    "eth": (420, 1.40, 0.040),
    "univ": (600, 1.10, 0.050),
    "zara1": (450, 1.30, 0.035),
    "zara2": (500, 1.25, 0.045),
}


def draw_lengths(rng, target_windows):
    """Trajectory lengths whose window counts (len - 19) sum to target."""
    lengths = []
    remaining = target_windows
    while remaining > 0:
        w = int(rng.integers(2, 27))  # 2..26 windows per pedestrian
        if w > remaining or remaining - w == 1:
            w = remaining
        lengths.append(w + WINDOW - 1)
        remaining -= w
    return lengths


def simulate(rng, n_steps, speed_mean, turn_std):
    pos = rng.uniform(-6.0, 6.0, size=2)
    heading = rng.uniform(0.0, 2.0 * np.pi)
    speed = max(0.2, rng.normal(speed_mean, 0.25))
    points = []
    for _ in range(n_steps):
        points.append(pos.copy())
        heading += rng.normal(0.0, turn_std)
        speed = max(0.2, speed + rng.normal(0.0, 0.03))
        pos = pos + DT * speed * np.array([np.cos(heading), np.sin(heading)])
    return np.array(points)


def write_scene(path, name, seed):
    target, speed_mean, turn_std = SCENES[name]
    rng = np.random.default_rng(seed)
    lengths = draw_lengths(rng, target)
    rows = []
    for ped_id, n in enumerate(lengths, start=1):
        start_frame = int(rng.integers(0, 200)) * FRAME_STEP
        pts = simulate(rng, n, speed_mean, turn_std)
        for i, (x, y) in enumerate(pts):
            rows.append((start_frame + i * FRAME_STEP, ped_id, x, y))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w") as f:
        f.write(f"# synthetic scene '{name}' (stand-in, see scripts/make_synthetic_scenes.py)\n")
        for frame, ped, x, y in rows:
            f.write(f"{frame}\t{ped}\t{x:.6f}\t{y:.6f}\n")
    n_windows = sum(n - WINDOW + 1 for n in lengths)
    print(f"{name}: {len(lengths)} pedestrians, {n_windows} windows -> {path}")


def write_mini_fixture(path, seed):
    rng = np.random.default_rng(seed)
    with open(path, "w") as f:
        f.write("# mini fixture: 3 pedestrians x 25 frames\n")
        for ped_id in range(1, 4):
            pts = simulate(rng, 25, 1.3, 0.05)
            for i, (x, y) in enumerate(pts):
                f.write(f"{i * FRAME_STEP}\t{ped_id}\t{x:.6f}\t{y:.6f}\n")
    print(f"mini fixture -> {path}")


def write_ood(path, seed):
    rng = np.random.default_rng(seed)
    scenarios = []

    def walk(speed, turn_fn):
        pos = np.zeros(2)
        heading = 0.0
        pts = []
        for i in range(WINDOW):
            pts.append(pos.copy())
            heading += turn_fn(i)
            pos = pos + DT * speed * np.array([np.cos(heading), np.sin(heading)])
        return np.array(pts)

    scenarios.append(walk(1.3, lambda i: 0.0))                                # normal
    scenarios.append(walk(1.3, lambda i: 0.22 if 6 <= i <= 12 else 0.0))      # left turn
    scenarios.append(walk(1.3, lambda i: -0.22 if 6 <= i <= 12 else 0.0))     # right turn
    scenarios.append(walk(0.6, lambda i: rng.normal(0.0, 0.02)))              # slow
    scenarios.append(walk(2.2, lambda i: rng.normal(0.0, 0.02)))              # fast

    with open(path, "w") as f:
        f.write("# out-of-distribution scenarios: normal, left, right, slow, fast\n")
        for ped_id, pts in enumerate(scenarios, start=1):
            for i, (x, y) in enumerate(pts):
                f.write(f"{i * FRAME_STEP}\t{ped_id}\t{x:.6f}\t{y:.6f}\n")
    print(f"ood scenarios -> {path}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    import os

    os.makedirs(f"{args.out}/scenes", exist_ok=True)
    for i, name in enumerate(SCENES):
        write_scene(f"{args.out}/scenes/{name}.txt", name, seed=1234 + i)
    write_mini_fixture(f"{args.out}/mini_fixture.txt", seed=99)
    write_ood(f"{args.out}/ood_scenarios.txt", seed=7)


if __name__ == "__main__":
    main()
