#!/usr/bin/env python3
"""Writes tests/data/gesture_corpus.json: labelled wrist trajectories.

Each trajectory rests, moves, then rests again. Motion directions are given
relative to the way the wrist faces, so labels follow from the motion alone.
"""
import json
import math
import random
import sys

REST_BEFORE = 100
REST_AFTER = 200


def trajectory(tid, label, facing, rel_angle, speed, duration, interval, rng, tremor=0.0003, shake=False):
    start = (0.45 + rng.uniform(-0.2, 0.2), 0.6 + rng.uniform(-0.2, 0.2))
    world = facing + rel_angle
    vx, vy = speed * math.cos(world), speed * math.sin(world)
    samples = []
    t = 0
    x, y = start
    end = REST_BEFORE + duration + REST_AFTER
    while t <= end:
        if REST_BEFORE < t <= REST_BEFORE + duration:
            sign = -1.0 if shake and (t // interval) % 2 else 1.0
            x += sign * vx * interval / 1000.0
            y += sign * vy * interval / 1000.0
        samples.append({
            "t": t,
            "x": round(x + rng.gauss(0.0, tremor), 6),
            "y": round(y + rng.gauss(0.0, tremor), 6),
            "heading": round(facing, 6),
        })
        t += interval
    return {"id": tid, "label": label, "facing": round(facing, 6), "samples": samples}


def main(path):
    rng = random.Random(20240611)
    facings = [-math.pi / 2, 0.0, math.pi / 2, math.pi * 0.999, -math.pi / 4, 3 * math.pi / 4]
    intervals = [10, 16, 20]
    out = []
    n = 0
    for label, base in (("push", 0.0), ("pull", math.pi)):
        for i in range(10):
            n += 1
            out.append(trajectory(f"{label}-{i + 1:02d}", label, facings[i % len(facings)],
                                  base + math.radians(rng.uniform(-15, 15)), rng.uniform(0.3, 0.6),
                                  rng.choice([250, 300, 350]), intervals[i % 3], rng))
    for i in range(10):
        side = math.pi / 2 if i % 2 == 0 else -math.pi / 2
        out.append(trajectory(f"slide-{i + 1:02d}", "slide", facings[(i + 2) % len(facings)],
                              side + math.radians(rng.uniform(-15, 15)), rng.uniform(0.3, 0.6),
                              rng.choice([250, 300, 350]), intervals[(i + 1) % 3], rng))
    negatives = [
        ("none-slow-push", dict(rel_angle=0.0, speed=0.12, duration=400)),
        ("none-slow-slide", dict(rel_angle=math.pi / 2, speed=0.15, duration=400)),
        ("none-below-threshold", dict(rel_angle=math.pi, speed=0.17, duration=400)),
        ("none-flick", dict(rel_angle=0.0, speed=0.5, duration=100)),
        ("none-shake", dict(rel_angle=math.pi / 2, speed=0.5, duration=400, shake=True)),
        ("none-rest", dict(rel_angle=0.0, speed=0.0, duration=400, tremor=0.0005)),
    ]
    for i, (tid, kw) in enumerate(negatives):
        out.append(trajectory(tid, "none", facings[i % len(facings)], interval=intervals[i % 3], rng=rng, **kw))
    with open(path, "w") as f:
        json.dump({"trajectories": out}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/gesture_corpus.json")
