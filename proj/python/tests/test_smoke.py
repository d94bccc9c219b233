import json

import numpy as np
import pytest

import niep


def test_version_and_coefficients():
    assert niep.__version__
    assert niep.sorted_spectrum([-2, 3, -2]) == [3, -2, -2]
    assert niep.elementary_coeffs([1, -1]) == [0, -1]
    assert niep.char_coeffs(np.eye(2)) == [-2, 1]
    ev = niep.eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert ev[0].real == pytest.approx(1.0)
    assert niep.power_sums([3, 3, -2, -2, -2], 3) == [0, 30, 30]


def test_exact_oracles():
    proof = niep.partition_prover([3, 3, -2, -2, -2])
    assert proof["verdict"] == "NotRealizable"
    assert proof["proof"]["kind"] == "PartitionExhaustion"
    assert niep.companion_realizer([6, -2, -2, -2])["verdict"] == "Realizable"
    conds = niep.check_necessary([1, 1, -3])
    assert any(not c["passed"] for c in conds)


def test_realize_and_perturb():
    r = niep.realize([4, 3, -2, -2, -2])
    assert r["verdict"] == "Realizable"
    cert = r["witness"]
    assert niep.verify_certificate(cert)
    a = np.array(cert["matrix"]).reshape(5, 5)
    assert a.min() >= 0
    assert np.allclose(sorted(np.linalg.eigvals(a).real), sorted(cert["spectrum"]), atol=1e-7)

    derived = niep.perturb(cert, [1.0, 0.25, 0.25, -0.25, -0.25])
    assert derived["spectrum"][0] == pytest.approx(5.0)
    assert niep.verify_certificate(derived)

    with pytest.raises(niep.ConstraintViolation):
        niep.perturb(cert, [0.1, 0.25, 0.25, -0.25, -0.25])


def test_symmetric_realize():
    r = niep.realize([4, 3, -2, -2, -2], symmetric=True)
    assert r["verdict"] == "Realizable"
    a = np.array(r["witness"]["matrix"]).reshape(5, 5)
    assert np.array_equal(a, a.T)


def test_estimate():
    e = niep.estimate_g([-1, -1])
    assert e["certified_lower"] == e["certified_upper"] == 2.0
    e = niep.estimate_g([3, -2, -2, -2], resolution=0.1)
    assert e["certified_lower"] >= 3.0
    assert e["certified_upper"] < 4.0


def test_objective_gradient():
    rng = np.random.default_rng(1)
    spectrum = [4, 3, -2, -2, -2]
    p = rng.uniform(0.1, 1.0, 25)
    value, grad = niep.objective("coefficient", p, spectrum)
    h = 1e-6
    fd = []
    for k in range(len(p)):
        up, down = p.copy(), p.copy()
        up[k] += h
        down[k] -= h
        fd.append((niep.objective("coefficient", up, spectrum)[0] - niep.objective("coefficient", down, spectrum)[0]) / (2 * h))
    assert value >= 0
    assert np.max(np.abs(np.array(grad) - fd)) <= 1e-5 * max(1.0, np.max(np.abs(grad)))


def test_errors_and_cli():
    with pytest.raises(niep.InvalidInput):
        niep.sorted_spectrum([])
    code, out, _ = niep.run_cli(["check", "3,3,-2,-2,-2"])
    assert code == 1
    assert json.loads(out)["verdict"] == "NotRealizable"
    code, _, err = niep.run_cli(["check", "1,x"])
    assert code == 64
    assert "error" in err
