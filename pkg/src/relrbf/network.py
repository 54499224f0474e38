"""Two-layer RBF network forward pass: Gaussian hidden layer, linear output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NonpositiveSigmaError
from .prototypes import DistanceState


@dataclass(frozen=True)
class NetworkParams:
    """Output-layer weights and per-prototype Gaussian bandwidths.

    w0: (g,) biases, W: (c, g) hidden-to-output weights, sigma: (c,) bandwidths.
    """

    w0: np.ndarray
    W: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        w0 = np.atleast_1d(np.asarray(self.w0, dtype=float)).copy()
        W = np.atleast_2d(np.asarray(self.W, dtype=float)).copy()
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float)).copy()
        if W.shape != (sigma.shape[0], w0.shape[0]):
            raise DimensionMismatchError(
                f"W shape {W.shape} incompatible with g={w0.shape[0]}, c={sigma.shape[0]}"
            )
        if not (
            np.all(np.isfinite(w0)) and np.all(np.isfinite(W)) and np.all(np.isfinite(sigma))
        ):
            raise ValueError("network parameters must be finite")
        if np.any(sigma <= 0):
            raise NonpositiveSigmaError(f"bandwidths must be positive, got min {sigma.min()}")
        for a in (w0, W, sigma):
            a.setflags(write=False)
        object.__setattr__(self, "w0", w0)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "sigma", sigma)

    @property
    def c(self) -> int:
        return self.sigma.shape[0]

    @property
    def g(self) -> int:
        return self.w0.shape[0]


@dataclass(frozen=True)
class NetworkResponse:
    """hidden[j, i] = kernel response of prototype j at observation i; output[i, k]."""

    hidden: np.ndarray
    output: np.ndarray


def gaussian_kernel(d, sigma):
    """exp(-d / (2 sigma^2)); elementwise over broadcastable inputs."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise NonpositiveSigmaError("sigma must be strictly positive")
    return np.exp(-np.asarray(d, dtype=float) / (2.0 * sigma**2))


def forward(d_state: DistanceState, params: NetworkParams) -> NetworkResponse:
    """Propagate a distance state through the network.

    output[i, k] = w0[k] + sum_j W[j, k] * exp(-d[j, i] / (2 sigma_j^2)).
    """
    d = d_state.d
    if d.shape[0] != params.c:
        raise DimensionMismatchError(
            f"distance state has {d.shape[0]} prototype rows, params expect {params.c}"
        )
    hidden = gaussian_kernel(d, params.sigma[:, None])
    output = hidden.T @ params.W + params.w0
    return NetworkResponse(hidden=hidden, output=output)


def sse(Y, response: NetworkResponse) -> float:
    """Sum of squared errors between desired and produced outputs."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape != response.output.shape:
        raise DimensionMismatchError(
            f"targets {Y.shape} vs outputs {response.output.shape}"
        )
    return float(np.sum((Y - response.output) ** 2))


def predict_labels(output: np.ndarray) -> np.ndarray:
    """Class decisions: argmax over outputs, ties to the smallest class index."""
    return np.argmax(np.atleast_2d(output), axis=1)
