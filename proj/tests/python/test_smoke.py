import math

import numpy as np
import pytest

import crbgate


def test_default_scene_crb():
    scene = crbgate.default_scene()
    assert len(scene.anchors) == 32
    f = crbgate.fim(scene.anchors, [10.0, 10.0], 3.0)
    assert f.shape == (2, 2)
    assert crbgate.best_rmse(f) == pytest.approx(math.sqrt(np.trace(np.linalg.inv(f))), rel=1e-12)


def test_chi2_and_errors():
    assert crbgate.chi2_quantile(0.05) == pytest.approx(-2 * math.log(0.05))
    with pytest.raises(crbgate.CrbgateError) as info:
        crbgate.chi2_quantile(1.5)
    assert info.value.kind == "domain_error"


def test_solve_noiseless():
    scene = crbgate.default_scene()
    truth = np.array([7.0, 12.0])
    rss = dict(zip([a.id for a in scene.anchors], crbgate.predict_rss(scene.anchors, truth)))
    est = crbgate.solve(scene.anchors, rss)
    assert np.linalg.norm(est["xy"] - truth) < 1e-6


def test_projection_round_trip():
    cam = crbgate.default_scene().cameras[1]
    pixel, depth = crbgate.project(cam, [9.0, 11.0, 0.5])
    assert np.allclose(crbgate.unproject(cam, pixel, depth), [9.0, 11.0, 0.5], atol=1e-9)


def test_heatmap_and_metrics():
    h = crbgate.crb_heatmap(crbgate.default_scene(), 5, 4)
    assert h.shape == (4, 5)
    assert np.all(np.isfinite(h))
    assert crbgate.iou([0, 0, 2, 2], [1, 0, 2, 2]) == pytest.approx(1 / 3)
    t = np.linspace(0, 1, 101)
    assert crbgate.auc(t, 1 - t) == pytest.approx(0.5)
