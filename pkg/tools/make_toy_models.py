#!/usr/bin/env python3
"""Generate the committed toy models and dataset under src/nzskip/assets/.

Trains a small MLP and a one-conv-layer CNN on the 8x8 sklearn digits,
quantizes them to Q8.8, and writes model + held-out dataset JSON files.
Run once; the outputs are committed so the test suite and sweeps are
deterministic without any training dependency.
"""

import json
import pathlib
import sys

import numpy as np
import torch
import torch.nn as nn
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from nzskip import FixedFormat, NzSkip, NzThreshold, ZeroSkip, quantize  # noqa: E402
from nzskip import network  # noqa: E402

ASSETS = pathlib.Path(__file__).resolve().parents[1] / "src" / "nzskip" / "assets"
FMT = FixedFormat(16, 8)
SEED = 7


def q(arr):
    return np.array([quantize(float(v), FMT).raw for v in np.ravel(arr)]).reshape(
        np.shape(arr)
    )


def train(model, xtr, ytr, epochs=400, lr=1e-2):
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss()
    xt = torch.tensor(xtr, dtype=torch.float32)
    yt = torch.tensor(ytr, dtype=torch.long)
    for _ in range(epochs):
        opt.zero_grad()
        loss = loss_fn(model(xt), yt)
        loss.backward()
        opt.step()
    return model


def main():
    torch.manual_seed(SEED)
    np.random.seed(SEED)
    digits = load_digits()
    # shift into [0.1, 1.1]: dense input data, so activation sparsity in deeper
    # layers comes from ReLU rather than from zero pixels in the images
    x = digits.data / 16.0 * 0.9 + 0.1
    y = digits.target
    xtr, xte, ytr, yte = train_test_split(
        x, y, test_size=200, random_state=SEED, stratify=y
    )

    # --- MLP 64-32-16-10
    mlp = nn.Sequential(
        nn.Linear(64, 32), nn.ReLU(), nn.Linear(32, 16), nn.ReLU(), nn.Linear(16, 10)
    )
    train(mlp, xtr, ytr)
    layers = []
    linears = [m for m in mlp if isinstance(m, nn.Linear)]
    for i, lin in enumerate(linears):
        w = q(lin.weight.detach().numpy())
        b = q(lin.bias.detach().numpy())
        layers.append(
            network.FullyConnected(
                network.WeightMatrix.from_raw(w, FMT), np.array(b)
            )
        )
        if i < len(linears) - 1:
            layers.append(network.Relu())
    mlp_graph = network.LayerGraph(tuple(layers), FMT)
    network.save_model(mlp_graph, ASSETS / "toy_mlp.json")

    # --- CNN: conv(1->4, 3x3) relu flatten fc(144->10)
    class Cnn(nn.Module):
        def __init__(self):
            super().__init__()
            self.conv = nn.Conv2d(1, 4, 3)
            self.fc = nn.Linear(4 * 6 * 6, 10)

        def forward(self, t):
            t = torch.relu(self.conv(t.view(-1, 1, 8, 8)))
            return self.fc(t.flatten(1))

    cnn = Cnn()
    train(cnn, xtr, ytr, epochs=300)
    cnn_graph = network.LayerGraph(
        (
            network.Conv2d(
                q(cnn.conv.weight.detach().numpy()),
                stride=1,
                padding=0,
                format=FMT,
                bias_raw=np.array(q(cnn.conv.bias.detach().numpy())),
            ),
            network.Relu(),
            network.Flatten(),
            network.FullyConnected(
                network.WeightMatrix.from_raw(q(cnn.fc.weight.detach().numpy()), FMT),
                np.array(q(cnn.fc.bias.detach().numpy())),
            ),
        ),
        FMT,
        input_shape=(1, 8, 8),
    )
    network.save_model(cnn_graph, ASSETS / "toy_cnn.json")

    # --- held-out dataset, quantized inputs
    dataset = [(q(sample), int(label)) for sample, label in zip(xte, yte)]
    network.save_dataset(dataset, ASSETS / "toy_dataset.json")

    # --- report fixed-point accuracy and the sweep landscape
    for name, graph in (("mlp", mlp_graph), ("cnn", cnn_graph)):
        _, acc_dense = network._aggregate_run(graph, dataset, ZeroSkip(), "reference")
        print(f"{name}: zeroskip accuracy {acc_dense:.3f}")
    base_layers, base_acc = network._aggregate_run(
        mlp_graph, dataset, ZeroSkip(), "reference"
    )
    base_kept = sum(s.kept_pairs for s in base_layers.values())
    for level in range(32, -1, -1):
        per_layer, acc = network._aggregate_run(
            mlp_graph, dataset, NzSkip(NzThreshold(level)), "reference"
        )
        kept = sum(s.kept_pairs for s in per_layer.values())
        red = base_kept / kept if kept else float("inf")
        print(
            f"L={level:2d}: kept={kept:8d} reduction={red:6.3f} "
            f"acc={acc:.3f} (drop {100 * (base_acc - acc):+.2f} pp)"
        )


if __name__ == "__main__":
    main()
