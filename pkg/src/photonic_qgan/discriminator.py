"""Classical discriminator (64 -> 64 -> 1 perceptron) and the adversarial losses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-7
LEAK = 0.2


def loss_g(d_fake) -> float:
    """Generator objective to maximize: mean log D(G(z))."""
    return float(np.mean(np.log(d_fake)))


def loss_d(d_real, d_fake) -> float:
    """Discriminator objective to maximize: mean [log D(x) + log(1 - D(G(z)))]."""
    return float(np.mean(np.log(d_real) + np.log1p(-np.asarray(d_fake))))


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


@dataclass
class Discriminator:
    W1: np.ndarray  # (n_in, hidden)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (hidden,)
    b2: float

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int = 64, hidden: int = 64) -> "Discriminator":
        """Uniform fan-in initialization, ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``."""
        k1 = 1.0 / np.sqrt(n_in)
        k2 = 1.0 / np.sqrt(hidden)
        return cls(
            W1=rng.uniform(-k1, k1, (n_in, hidden)),
            b1=rng.uniform(-k1, k1, hidden),
            W2=rng.uniform(-k2, k2, hidden),
            b2=float(rng.uniform(-k2, k2)),
        )

    @classmethod
    def zeros(cls, n_in: int = 64, hidden: int = 64) -> "Discriminator":
        return cls(np.zeros((n_in, hidden)), np.zeros(hidden), np.zeros(hidden), 0.0)

    def copy(self) -> "Discriminator":
        return Discriminator(self.W1.copy(), self.b1.copy(), self.W2.copy(), float(self.b2))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.W2, [self.b2]])

    def from_flat(self, theta) -> "Discriminator":
        theta = np.asarray(theta, dtype=float)
        n_in, hidden = self.W1.shape
        i = n_in * hidden
        return Discriminator(
            theta[:i].reshape(n_in, hidden).copy(),
            theta[i : i + hidden].copy(),
            theta[i + hidden : i + 2 * hidden].copy(),
            float(theta[-1]),
        )

    def _forward(self, X):
        u = X @ self.W1 + self.b1
        h = np.where(u > 0, u, LEAK * u)
        a = h @ self.W2 + self.b2
        return u, h, a

    def __call__(self, X) -> np.ndarray:
        """Probability that each row of ``X`` is a real image, clamped to [EPS, 1 - EPS]."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _, _, a = self._forward(X)
        return np.clip(_sigmoid(a), EPS, 1.0 - EPS)

    def _backward(self, X, u, h, da) -> np.ndarray:
        """Flat parameter gradient given d(objective)/d(logit) per sample."""
        gW2 = h.T @ da
        gb2 = da.sum()
        dh = np.outer(da, self.W2)
        du = dh * np.where(u > 0, 1.0, LEAK)
        gW1 = X.T @ du
        gb1 = du.sum(axis=0)
        return np.concatenate([gW1.ravel(), gb1, gW2, [gb2]])

    def output_grad(self, x) -> np.ndarray:
        """Gradient of the (unclamped) output D(x) with respect to every parameter."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        u, h, a = self._forward(X)
        p = _sigmoid(a)
        return self._backward(X, u, h, p * (1.0 - p))

    def loss_d_grad(self, real, fake) -> tuple[float, np.ndarray]:
        """L_D on the given batches and its gradient with respect to the flat parameters."""
        real = np.atleast_2d(np.asarray(real, dtype=float))
        fake = np.atleast_2d(np.asarray(fake, dtype=float))
        if len(real) != len(fake):
            raise ValueError(f"batch sizes differ: {len(real)} real, {len(fake)} fake")
        X = np.vstack([real, fake])
        u, h, a = self._forward(X)
        p = _sigmoid(a)
        n = len(real)
        # d/da log(sigmoid a) = 1 - p ; d/da log(1 - sigmoid a) = -p
        da = np.concatenate([1.0 - p[:n], -p[n:]]) / n
        value = loss_d(np.clip(p[:n], EPS, 1 - EPS), np.clip(p[n:], EPS, 1 - EPS))
        return value, self._backward(X, u, h, da)


def disc_update(d: Discriminator, real_batch, fake_batch, lr: float = 0.002) -> tuple[Discriminator, float]:
    """One gradient-ascent step on L_D. Returns the new discriminator and L_D before the step."""
    value, grad = d.loss_d_grad(real_batch, fake_batch)
    if lr == 0:
        return d.copy(), value
    return d.from_flat(d.flat() + lr * grad), value
