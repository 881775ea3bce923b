import json
import math

import numpy as np
import pytest

import osc


def test_catalog():
    acts = osc.activations()
    assert len(acts) == 27
    assert osc.parse_activation("SSU") == osc.Activation.SSU
    assert osc.parse_activation("nope") is None
    assert osc.name(osc.Activation.GCU) == "GCU"


def test_evaluate_vectorized():
    z = np.array([0.0, math.pi / 2, 1.0])
    out = osc.evaluate(osc.Activation.GCU, z)
    assert out.shape == (3,)
    assert out[0] == 0.0
    assert out[2] == pytest.approx(math.cos(1.0))
    assert osc.evaluate(osc.Activation.SQU, -0.5) == pytest.approx(-0.25)
    assert osc.derivative(osc.Activation.NCU, 0.0) == 1.0


def test_kink_raises():
    with pytest.raises(osc.KinkError):
        osc.derivative(osc.Activation.ReLU, 0.0)
    assert issubclass(osc.KinkError, osc.DomainError)
    assert osc.subgradient(osc.Activation.ReLU, 0.0) == 0.0


def test_descriptor_and_scans():
    d = osc.descriptor(osc.Activation.DSU)
    assert d["xor_property"] is True
    zc = osc.zero_crossings(osc.Activation.Sine)
    assert zc["crossing_count"] == 7
    g = osc.gradient_check(osc.Activation.Mish)
    assert g["passed"]


def test_xor():
    cert = osc.certify(osc.Activation.SQU, 1.0, 1.0, 0.5)
    assert len(cert["margins"]) == 4
    grid = osc.grid_search_certificate(osc.Activation.Sine)
    assert grid["correct"] == 4
    assert osc.grid_search_certificate(osc.Activation.Tanh)["correct"] < 4
    assert osc.solve_xor(osc.Activation.SSU)["method"] in ("trained", "grid")


def test_records_round_trip():
    rec = osc.synthetic_check_image("gradient", 4, 3)
    assert len(rec) == 3073
    label, px = osc.decode_record(rec)
    assert label == 4
    assert px.shape == (3, 32, 32)
    assert px[1, 2, 3] == 3 + 4 * (3 + 2) + 1
    assert osc.encode_record(label, px) == rec

    ds = osc.parse_records(osc.synthetic_check_image("constant", 9, 255) * 2)
    assert len(ds) == 2
    assert ds.labels == [9, 9]
    assert np.all(ds.images() == 1.0)

    bad = bytearray(rec)
    bad[0] = 12
    with pytest.raises(osc.CorruptRecordError):
        osc.parse_records(bytes(bad))
    with pytest.raises(osc.FormatError):
        osc.parse_records(rec[:-1])


def test_cross_entropy_uniform():
    loss, grad = osc.softmax_cross_entropy(np.zeros((2, 10)), [1, 8])
    assert loss == pytest.approx(math.log(10.0), abs=1e-12)
    assert grad.shape == (2, 10)


def test_model_forward():
    m = osc.Model(conv_layers=2, activation=osc.Activation.SSU, seed=1)
    assert m.parameter_count() == 282250
    assert m.layers()[0].startswith("Conv2d")
    logits = m.forward(np.zeros((2, 3, 32, 32)))
    assert logits.shape == (2, 10)
    with pytest.raises(osc.ConfigError):
        osc.Model(conv_layers=5)


def test_property_report(tmp_path):
    report = json.loads(osc.property_report_json())
    assert report
    assert osc.property_contradictions() == []
    assert osc.run_properties(str(tmp_path)) == 0
    assert (tmp_path / "properties.json").exists()
