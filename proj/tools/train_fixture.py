#!/usr/bin/env python3
"""Train a small VAE on MNIST and export it as a .bbw weight file.

Used to produce tests/data/trained_*.bbw, the fixtures whose posteriors look
like those of a real model. Requires torch and the MNIST training images.

    python3 tools/train_fixture.py --arch binarized --train path/to/train-images-idx3-ubyte \
        --test data/mnist/t10k-images-idx3-ubyte --epochs 30 --out tests/data/trained_binarized.bbw
"""
import argparse
import json
import math
import struct

import numpy as np
import torch
from torch import nn

ARCHS = {
    "binarized": dict(hidden=100, latent=40, likelihood="bernoulli"),
    "full": dict(hidden=200, latent=50, likelihood="beta_binomial"),
}


def read_idx(path):
    raw = open(path, "rb").read()
    magic, n, rows, cols = struct.unpack(">IIII", raw[:16])
    assert magic == 0x803 and rows == cols == 28
    return np.frombuffer(raw[16:], dtype=np.uint8).reshape(n, 784)


class Vae(nn.Module):
    def __init__(self, hidden, latent, likelihood):
        super().__init__()
        self.likelihood = likelihood
        self.enc_hidden = nn.Linear(784, hidden)
        self.enc_mu = nn.Linear(hidden, latent)
        self.enc_log_sigma = nn.Linear(hidden, latent)
        self.dec_hidden = nn.Linear(latent, hidden)
        heads = ["logits"] if likelihood == "bernoulli" else ["alpha", "beta"]
        self.heads = nn.ModuleDict({h: nn.Linear(hidden, 784) for h in heads})

    def inputs(self, s):
        return s if self.likelihood == "bernoulli" else s / 255.0

    def neg_elbo_bits(self, s):
        h = torch.relu(self.enc_hidden(self.inputs(s)))
        mu, log_sigma = self.enc_mu(h), self.enc_log_sigma(h)
        y = mu + torch.exp(log_sigma) * torch.randn_like(mu)
        g = torch.relu(self.dec_hidden(y))
        if self.likelihood == "bernoulli":
            log_lik = -nn.functional.binary_cross_entropy_with_logits(
                self.heads["logits"](g), s, reduction="none").sum(1)
        else:
            a = nn.functional.softplus(self.heads["alpha"](g)) + 1e-4
            b = nn.functional.softplus(self.heads["beta"](g)) + 1e-4
            n = 255.0
            log_choose = torch.lgamma(torch.tensor(n + 1)) - torch.lgamma(s + 1) - torch.lgamma(n - s + 1)
            log_lik = (log_choose + torch.lgamma(s + a) + torch.lgamma(n - s + b)
                       - torch.lgamma(n + a + b) - torch.lgamma(a) - torch.lgamma(b)
                       + torch.lgamma(a + b)).sum(1)
        kl = 0.5 * (mu ** 2 + torch.exp(2 * log_sigma) - 1 - 2 * log_sigma).sum(1)
        return (kl - log_lik) / math.log(2)

    def tensors(self):
        pairs = [("encoder.hidden", self.enc_hidden), ("encoder.mu", self.enc_mu),
                 ("encoder.log_sigma", self.enc_log_sigma), ("decoder.hidden", self.dec_hidden)]
        pairs += [(f"decoder.{k}", v) for k, v in self.heads.items()]
        for name, layer in pairs:
            yield name + ".weight", layer.weight.detach().numpy()
            yield name + ".bias", layer.bias.detach().numpy()


def export(model, arch, path):
    cfg = ARCHS[arch]
    blobs, entries, offset = [], [], 0
    for name, array in model.tensors():
        data = np.ascontiguousarray(array, dtype="<f4").tobytes()
        entries.append({"name": name, "shape": list(array.shape), "dtype": "f32le", "offset": offset})
        blobs.append(data)
        offset += len(data)
    manifest = json.dumps({
        "format": "bbans-vae-weights", "version": 1, "likelihood": cfg["likelihood"],
        "input_dim": 784, "hidden_dim": cfg["hidden"], "latent_dim": cfg["latent"],
        "tensors": entries,
    }).encode()
    with open(path, "wb") as f:
        f.write(b"BBVAEW\x00\x01" + struct.pack("<I", len(manifest)) + manifest + b"".join(blobs))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--arch", choices=ARCHS, required=True)
    ap.add_argument("--train", required=True)
    ap.add_argument("--test", required=True)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--batch", type=int, default=100)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    torch.manual_seed(args.seed)
    rng = np.random.default_rng(args.seed)
    cfg = ARCHS[args.arch]
    model = Vae(cfg["hidden"], cfg["latent"], cfg["likelihood"])
    opt = torch.optim.Adam(model.parameters(), lr=args.lr)
    train = read_idx(args.train).astype(np.float32)
    test = read_idx(args.test).astype(np.float32)
    binary = cfg["likelihood"] == "bernoulli"

    def prepare(x):
        return (rng.random(x.shape) < x / 255.0).astype(np.float32) if binary else x

    for epoch in range(args.epochs):
        order = rng.permutation(len(train))
        data = torch.from_numpy(prepare(train[order]))
        total = 0.0
        for i in range(0, len(data), args.batch):
            loss = model.neg_elbo_bits(data[i:i + args.batch]).mean()
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(data[i:i + args.batch])
        if not math.isfinite(total):
            raise SystemExit("training diverged")
        with torch.no_grad():
            test_bpd = model.neg_elbo_bits(torch.from_numpy(prepare(test))).mean().item() / 784
        print(f"epoch {epoch + 1}: train {total / len(train) / 784:.4f} bpd, test {test_bpd:.4f} bpd",
              flush=True)
    export(model, args.arch, args.out)
    print("wrote", args.out)


if __name__ == "__main__":
    main()
