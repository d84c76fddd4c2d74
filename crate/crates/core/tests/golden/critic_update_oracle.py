"""Independent recomputation of the golden critic-update values.

Usage: cargo run --release --example golden_critic_update -- agent.json
       python3 critic_update_oracle.py agent.json
"""
import json
import sys

import numpy as np


def net(d):
    layers = [(np.array(l["weight"]["data"]).reshape(l["weight"]["rows"], l["weight"]["cols"]), np.array(l["bias"]))
              for l in d["layers"]]
    return layers, d["activations"]


def forward(n, x):
    layers, acts = n
    for (w, b), a in zip(layers, acts):
        x = x @ w + b
        if a == "relu":
            x = np.maximum(x, 0)
        elif a == "tanh":
            x = np.tanh(x)
    return x


def loss_and_grad(n, x, y, alpha, beta):
    layers, acts = n
    hs = [x]
    for (w, b), a in zip(layers, acts):
        z = hs[-1] @ w + b
        hs.append(np.maximum(z, 0) if a == "relu" else np.tanh(z) if a == "tanh" else z)
    pred = hs[-1][:, 0]
    z = max(alpha, beta)
    wts = np.where(pred < y, alpha, beta) / z
    loss = np.mean(wts * (y - pred) ** 2)
    g = (wts * 2 * (pred - y) / len(y))[:, None]
    grads = []
    for i in reversed(range(len(layers))):
        if acts[i] == "relu":
            g = g * (hs[i + 1] > 0)
        elif acts[i] == "tanh":
            g = g * (1 - hs[i + 1] ** 2)
        grads.append((hs[i].T @ g, g.sum(0)))
        g = g @ layers[i][0].T
    return loss, grads[::-1]


agent = json.load(open(sys.argv[1]))["agent"]
alpha, beta = agent["expectile"]["alpha"], agent["expectile"]["beta"]
gamma, lr = agent["config"]["gamma"], agent["config"]["lr_critic"]
actor_t = net(agent["actor_target"])
critic = net(agent["critics"][0]["net"])
critic_t = net(agent["critics"][0]["target"])

s = np.array([[0.1, -0.2], [0.5, 0.3], [-0.7, 0.9], [0.0, 0.4]])
a = np.array([[0.2], [-0.5], [0.9], [0.0]])
r = np.array([1.0, -0.5, 0.25, 2.0])
s2 = np.array([[0.2, -0.1], [0.4, 0.2], [-0.6, 1.0], [0.1, 0.5]])
d = np.array([0.0, 0.0, 1.0, 0.0])

a2 = forward(actor_t, s2)
y = r + gamma * (1 - d) * forward(critic_t, np.hstack([s2, a2]))[:, 0]
x = np.hstack([s, a])
before, grads = loss_and_grad(critic, x, y, alpha, beta)
# One bias-corrected Adam step from zero moments.
b1, b2, eps = 0.9, 0.999, 1e-8
new_layers = []
for (w, b), (gw, gb) in zip(critic[0], grads):
    step = lambda p, g: p - lr * ((1 - b1) * g / (1 - b1)) / (np.sqrt((1 - b2) * g * g / (1 - b2)) + eps)
    new_layers.append((step(w, gw), step(b, gb)))
after, _ = loss_and_grad((new_layers, critic[1]), x, y, alpha, beta)
print(repr(before), repr(after))
