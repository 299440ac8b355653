"""The adversarial objective, its constrained variant, and the reward map.

Small synthetic pools stand in for expert and agent data so every effect
is visible in a dozen printed numbers: the objective value at the constant
1/2 discriminator, a few ascent steps, the constraint gate flipping on and
off, and the score-to-reward curve with its cap.
"""
from dataclasses import replace

import numpy as np

from imitation_lab import nn
from imitation_lab.discriminator import (EPS, DiscBatch, Discriminator,
                                         gail_gradients, gail_term,
                                         make_discriminator, scores,
                                         trail_gradients)

rng = np.random.default_rng(3)

# Two overlapping Gaussian pools in 4-D; the last coordinate is the "spurious"
# one that separates them cleanly, the rest barely do.
def draw(n, shift):
    x = rng.normal(size=(n, 4)) * 0.6
    x[:, 3] += shift
    return x

expert = draw(64, +1.2)
agent = draw(64, -1.2)

disc = make_discriminator(4, hidden=(16,), seed=0)

# Zero the output layer: D is exactly 1/2 everywhere, and the objective for
# N frames per side sits at its closed form 2N log(1/2).
net = disc.net
disc = Discriminator(replace(
    net, weights=net.weights[:-1] + (np.zeros_like(net.weights[-1]),),
    biases=net.biases[:-1] + (np.zeros_like(net.biases[-1]),)))
value = gail_term(disc, expert, agent)
print(f"indifferent objective {value:8.2f}   (2N ln 1/2 = {2 * 64 * np.log(0.5):.2f})")

adam = nn.init_adam(disc.net)
for step in range(200):
    _, grads = gail_gradients(disc, expert, agent)
    # adam_step descends; the discriminator ascends, so flip the gradients
    net, adam = nn.adam_step(disc.net, grads.scaled(-1.0), adam, lr=1e-2)
    disc = Discriminator(net)
print(f"after 200 ascent steps {gail_term(disc, expert, agent):8.2f}   "
      f"(0 is perfect separation)")
print(f"mean scores: expert {np.mean(scores(disc, expert)):.3f}, "
      f"agent {np.mean(scores(disc, agent)):.3f}\n")

# Constraining sets drawn the same way flip the gate on: the discriminator
# separates them above chance, so the constrained objective subtracts their
# term, pushing it back toward indifference on that channel.
c_expert, c_agent = draw(32, +1.2), draw(32, -1.2)
batch = DiscBatch(expert, agent, c_expert, c_agent)
val, _grads, info = trail_gradients(disc, batch)
print(f"constraint accuracy {info['constraint_accuracy']:.3f} -> "
      f"gate {'on' if info['gate'] else 'off'}, value {val:.2f}")

# Mislabel the sets (swap sides) and the accuracy drops below 1/2: the gate
# goes off and the constrained objective is bit-identical to the plain one.
swapped = DiscBatch(expert, agent, c_agent, c_expert)
val2, _g, info2 = trail_gradients(disc, swapped)
print(f"swapped sets:  accuracy {info2['constraint_accuracy']:.3f} -> "
      f"gate {'on' if info2['gate'] else 'off'}, value {val2:.2f} "
      f"(plain objective {gail_term(disc, expert, agent):.2f})\n")

# The imitation reward is -log(1 - D): flat near 0, steep near 1, clipped so
# a saturated discriminator cannot mint infinities.
for s in (0.1, 0.5, 0.9, 0.99):
    print(f"  reward at D={s:<5} {-np.log(1.0 - s):8.4f}")
print(f"  reward cap (D clipped to 1-eps)  {-np.log(EPS):8.4f}")
print(f"  reward floor (D clipped up to eps) {-np.log(1.0 - EPS):8.6f}")
