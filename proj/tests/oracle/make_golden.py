#!/usr/bin/env python3
"""Golden forward-pass values for the checked-in fixture models.

Reads the .bbw weight files with numpy alone (no shared code with the C++
loader) and evaluates recognition and generation on the first MNIST test
image. Output goes to tests/data/golden_<arch>.json.
"""
import json
import struct
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[2]
MAGIC = b"BBVAEW\x00\x01"


def load_bbw(path):
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    (n,) = struct.unpack("<I", raw[8:12])
    manifest = json.loads(raw[12:12 + n])
    base = 12 + n
    tensors = {}
    for t in manifest["tensors"]:
        count = int(np.prod(t["shape"]))
        start = base + t["offset"]
        data = np.frombuffer(raw[start:start + 4 * count], dtype="<f4")
        tensors[t["name"]] = data.reshape(t["shape"]).astype(np.float64)
    return manifest, tensors


def dense(t, name, x):
    return t[name + ".weight"] @ x + t[name + ".bias"]


def first_test_image():
    raw = (ROOT / "data/mnist/t10k-images-idx3-ubyte").read_bytes()
    return np.frombuffer(raw[16:16 + 784], dtype=np.uint8)


def golden(arch):
    manifest, t = load_bbw(ROOT / f"tests/data/fixture_{arch}.bbw")
    pixels = first_test_image()
    if manifest["likelihood"] == "bernoulli":
        image = (pixels >= 128).astype(np.uint8)
        x = image.astype(np.float64)
    else:
        image = pixels
        x = image.astype(np.float64) / 255.0
    h = np.maximum(dense(t, "encoder.hidden", x), 0.0)
    mu = dense(t, "encoder.mu", h)
    sigma = np.exp(dense(t, "encoder.log_sigma", h))
    g = np.maximum(dense(t, "decoder.hidden", mu), 0.0)
    out = {"image": image.tolist(), "mu": mu.tolist(), "sigma": sigma.tolist()}
    if manifest["likelihood"] == "bernoulli":
        out["probs"] = (1.0 / (1.0 + np.exp(-dense(t, "decoder.logits", g)))).tolist()
    else:
        out["alpha"] = (np.logaddexp(0.0, dense(t, "decoder.alpha", g)) + 1e-4).tolist()
        out["beta"] = (np.logaddexp(0.0, dense(t, "decoder.beta", g)) + 1e-4).tolist()
    return out


def main():
    for arch in sys.argv[1:] or ["binarized", "full"]:
        path = ROOT / f"tests/data/golden_{arch}.json"
        path.write_text(json.dumps(golden(arch)))
        print("wrote", path)


if __name__ == "__main__":
    main()
