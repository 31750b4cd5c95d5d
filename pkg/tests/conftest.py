import numpy as np
import pytest

from gaitrel.nn import Activation, DenseNetwork, LayerParams, init_network

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _CRITERIA.append((marker.args[0], marker.args[1], item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, text, name, outcome in sorted(_CRITERIA, key=lambda r: (r[0], r[2])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {num}: {text} ({name})")


def random_net(seed, dims=(10, 8, 4, 2), biases=True, final=Activation.SOFTMAX):
    net = init_network(seed, dims)
    rng = np.random.default_rng(seed + 1000)
    for layer in net.layers:
        layer.biases[:] = rng.normal(0, 0.1, layer.out_dim) if biases else 0.0
    net.layers[-1].activation = final
    return net


def linear_net(w, b=0.0):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    return DenseNetwork([LayerParams(w, np.full(w.shape[0], float(b)), Activation.IDENTITY)])


def central_diff(f, x, h=1e-5):
    """Central finite differences of scalar f over every entry of array x (modified in place, restored)."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f()
        x[i] = old - h
        fm = f()
        x[i] = old
        grad[i] = (fp - fm) / (2 * h)
    return grad


def rel_err(a, b, floor=1e-6):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
