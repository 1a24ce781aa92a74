"""Quick end-to-end check of the mchwave extension module."""

import math

import mchwave

C, K = 1.0, 0.4


def main():
    params = mchwave.validate_parameters(C, K)
    assert abs(params["phi1"] - 0.896148140) < 1e-6

    try:
        mchwave.validate_parameters(C, 0.6)
    except ValueError as err:
        assert "sqrt(3c)/3" in str(err)
    else:
        raise AssertionError("k = 0.6 should be rejected")

    profile = mchwave.construct_profile(C, K)
    assert len(profile["xi"]) == len(profile["phi"]) == len(profile["mu"])
    assert abs(max(profile["phi"]) - 0.896148140) < 1e-6

    q, dq, vk = mchwave.closed_forms(C, K)
    report = mchwave.functionals(C, K)
    assert abs(report["Q_quad"] - q) < 1e-6
    assert abs(dq + 18.7332) < 5e-5 and vk < 0

    spec = mchwave.spectrum(C, K)
    assert spec["structure_ok"] and spec["negative_count"] == 1
    assert abs(spec["vk_value"] - vk) < 0.01 * abs(vk)

    run = mchwave.evolve(C, K, t_end=1.0, perturbation="gaussian", eps=1e-4)
    samples = run["samples"]
    assert len(samples) == 11 and samples[-1]["t"] == 1.0
    assert all(s["min_m"] > 0 for s in samples)
    assert abs(samples[-1]["r_star"] - C * 1.0) < 0.1
    assert run["summary"]["sup_distance"] < 10 * 1e-4

    table = mchwave.sweep(C, k_min=0.38, k_max=0.52, k_count=3)
    assert table["verdict"]["passed"] and len(table["rows"]) == 3

    verdict = mchwave.verify_all(C, K, evolution=False)
    assert verdict["passed"], [c["name"] for c in verdict["checks"] if not c["passed"]]

    try:
        mchwave.evolve(C, K, n=1024, perturbation="translation_mode", eps=50.0)
    except mchwave.NumericalError as err:
        assert "positivity" in str(err)
    else:
        raise AssertionError("large perturbation should lose positivity")

    print(
        "mchwave smoke test passed: crest %.9f, Q %.6f, vk %.6f, %d samples"
        % (max(profile["phi"]), q, spec["vk_value"], len(samples))
    )
    assert math.isfinite(q)


if __name__ == "__main__":
    main()
