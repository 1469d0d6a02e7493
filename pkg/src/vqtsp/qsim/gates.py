"""Gate matrices.  RX(t) = exp(-i t X / 2), RXX(t) = exp(-i t X(x)X / 2), etc.

Two-qubit matrices act on ``|a b>`` with ``a`` the first target, basis order
00, 01, 10, 11.  CX uses the first target as control.
"""

import numpy as np

ONE_QUBIT = ("H", "RX", "RY", "RZ")
TWO_QUBIT = ("CX", "RXX", "RZZ")
PARAMETRIC = ("RX", "RY", "RZ", "RXX", "RZZ")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_XX = np.kron(_X, _X)


def rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rxx(theta):
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * _XX


def rzz(theta):
    a, b = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([a, b, b, a])


_BUILDERS = {"RX": rx, "RY": ry, "RZ": rz, "RXX": rxx, "RZZ": rzz}


def matrix(kind: str, theta=None) -> np.ndarray:
    if kind == "H":
        return _H
    if kind == "CX":
        return _CX
    return _BUILDERS[kind](float(theta))
