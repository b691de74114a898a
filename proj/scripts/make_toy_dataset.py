#!/usr/bin/env python3
# Copyright 2026 The progbench Authors
# SPDX-License-Identifier: Apache-2.0
"""Generates the bundled toy dataset: five short trajectories seen from two
viewpoints, tiny solid-colour PNG frames, text rewrites, image edits and a few
review decisions. Output is deterministic."""

import argparse
import hashlib
import json
import struct
import zlib
from pathlib import Path

VIEWPOINTS = ["front", "wrist"]
FRAME_STEP = 0.25
K = 4

TASKS = [
    ("toy_pick_place", "franka", "Put the [red block] into the [blue bowl].",
     ["Reach toward the [red block].", "Grasp the [red block].", "Lift the [red block] above the [blue bowl].",
      "Release the [red block] into the [blue bowl]."],
     [0, 30, 60, 100]),
    ("toy_open_drawer", "ur5e", "Open the [top drawer].",
     ["Approach the [top drawer] handle.", "Grip the handle.", "Pull the [top drawer] halfway.",
      "Pull the [top drawer] fully open.", "Retract the arm."],
     [0, 20, 50, 80, 100]),
    ("toy_stack_cups", "agilex", "Stack the [green cup] on the [yellow cup].",
     ["Locate the [green cup].", "Pick up the [green cup].", "Place the [green cup] on the [yellow cup]."],
     [0, 45, 100]),
    ("toy_wipe_table", "humanoid", "Wipe the [table] with the [sponge].",
     ["Pick up the [sponge].", "Move the [sponge] to the [table].", "Wipe the left half of the [table].",
      "Wipe the right half of the [table].", "Put the [sponge] back.", "Return to rest."],
     [0, 15, 35, 60, 85, 100]),
    ("toy_pour_water", "human", "Pour water from the [kettle] into the [mug].",
     ["Grab the [kettle].", "Tilt the [kettle] over the [mug].", "Set the [kettle] down."],
     [0, 70, 100]),
]

REWRITES = {
    "toy_pick_place": ("Put the [red block] into the [blue bowl] on the shelf.", [
        "Reach toward the [red block] on the shelf.", "Grasp the [red block] with both hands.",
        "Lift the [red block] above the [blue bowl].", "Release the [red block] into the [blue bowl]."]),
    "toy_open_drawer": ("Close the [top drawer].", [
        "Approach the [top drawer] handle.", "Grip the knob.", "Push the [top drawer] halfway.",
        "Push the [top drawer] fully shut.", "Retract the arm."]),
    "toy_stack_cups": ("Stack the [green cup] under the [yellow cup].", [
        "Locate the [green cup].", "Slide the [green cup] aside.",
        "Place the [yellow cup] on the [green cup]."]),
    "toy_wipe_table": ("Wipe the [table] with the [sponge] and a towel.", [
        "Pick up the [sponge] and a towel.", "Move the [sponge] to the [table].",
        "Wipe the left half of the [table].", "Wipe the right half of the [table].",
        "Throw the [sponge] away.", "Return to rest."]),
    "toy_pour_water": ("Pour milk from the [kettle] into the [mug].", [
        "Grab the [kettle].", "Tilt the [kettle] beside the [mug].", "Set the [kettle] down."]),
}

STRATEGIES = ["Color Change", "Object Replacement", "Occlusion/Removal"]


def png(width, height, rgb):
    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    row = b"\x00" + bytes(rgb) * width
    raw = row * height
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0))
            + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b""))


def colour(*parts):
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return digest[0], digest[1], digest[2]


def write(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def jsonl(path, rows):
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/toy")
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    trajectories, rewrites, edits, decisions = [], [], [], []
    for tid, embodiment, goal, texts, progress in TASKS:
        n = len(texts)
        steps = []
        for i, (text, p) in enumerate(zip(texts, progress), start=1):
            frame = f"frames/{tid}/{VIEWPOINTS[0]}_{(i - 1) / FRAME_STEP:03.0f}.png"
            steps.append({"index": i, "progress": p, "text": text, "frame_ref": frame,
                          "viewpoint": VIEWPOINTS[0], "timestamp": float(i - 1)})
        frames = []
        n_frames = int((n - 1) / FRAME_STEP) + 1
        for vp in VIEWPOINTS:
            for f in range(n_frames):
                ref = f"frames/{tid}/{vp}_{f:03d}.png"
                write(out / ref, png(8, 8, colour(tid, vp, f)))
                frames.append({"ref": ref, "viewpoint": vp, "timestamp": f * FRAME_STEP})
        trajectories.append({"id": tid, "goal": goal, "embodiment": embodiment, "viewpoints": VIEWPOINTS,
                             "steps": steps, "video_frames": frames})

        edited_goal, edited_demo = REWRITES[tid]
        rewrites.append({"trajectory_id": tid, "edited_goal": edited_goal, "edited_demo": edited_demo})

        # Edits cover every vision instance id the sampler can emit, so any
        # selected seed finds one; candidates alternate keep / discard / pending.
        counter = 0
        for j in range(1, n):
            for k in range(1, K):
                delta = k / K
                for view in ("vs", "vc"):
                    iid = f"{tid}_{view}_j{j}_d{delta:.6f}"
                    strategy = STRATEGIES[counter % len(STRATEGIES)]
                    ref = f"edited/{iid}.png"
                    write(out / ref, png(8, 8, colour("edit", iid)))
                    edits.append({"instance_id": iid, "edited_frame_ref": ref, "strategy": strategy,
                                  "prompt": f"Apply {strategy.lower()} to the manipulated object in step {j}."})
                    verdict = ("keep", "discard", None)[counter % 3]
                    if verdict:
                        decisions.append({"candidate_id": iid + "-neg", "verdict": verdict,
                                          "annotator": "toy", "timestamp": "2026-01-01T00:00:00.000Z"})
                    counter += 1

    jsonl(out / "trajectories.jsonl", trajectories)
    jsonl(out / "rewrites.jsonl", rewrites)
    jsonl(out / "edits.jsonl", edits)
    jsonl(out / "decisions.jsonl", decisions)
    (out / "progbench.toml").write_text(
        "# Example configuration; command-line flags override these values.\n"
        "seed = 42\nk = 4\nepsilon = 0.1\nmode = \"interval\"\ncross-view-fraction = 0.5\n"
        "unanswerable-fraction = 0.2\ntemperature = 0.6\ntop-p = 0.9\nmax-in-flight = 4\n")


if __name__ == "__main__":
    main()
