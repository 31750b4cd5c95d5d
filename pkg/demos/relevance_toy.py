"""Compare the three attribution methods on a small hand-sized network.

A single linear output with weights [2, -1] and input [1, 1] makes the
alpha-beta split easy to read: the positive contribution is doubled and the
negative one kept at weight one, and the sum matches the logit.
"""
import numpy as np

from gaitrel import nn
from gaitrel.nn import Activation, DenseNetwork, LayerParams
from gaitrel.relevance import explain_gradient, explain_lrp_alphabeta, explain_lrp_epsilon

net = DenseNetwork([LayerParams(np.array([[2.0, -1.0], [0.0, 0.0]]), np.zeros(2), Activation.SOFTMAX)])
x = np.array([1.0, 1.0])
print("logit:", nn.forward(net, x).logits[0])
for fn in (explain_gradient, explain_lrp_epsilon, explain_lrp_alphabeta):
    print(f"{fn.__name__:24s}", fn(net, x, 0).values)

# a random bias-free ReLU net: epsilon-LRP redistributes the logit exactly
rng = np.random.default_rng(0)
net = nn.init_network(0, dims=(10, 8, 4, 2))
for layer in net.layers:
    layer.biases[:] = 0
x = rng.normal(size=10)
logits = nn.forward(net, x).logits
t = int(np.argmax(logits))
R = explain_lrp_epsilon(net, x, t).values
print(f"\ntarget logit {logits[t]:.6f}, sum of relevance {R.sum():.6f}")
