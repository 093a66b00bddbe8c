import random

import numpy as np
import pytest

from decrn import (
    ConstantHistory,
    FaceTag,
    PreconditionError,
    SolverConfig,
    certify,
    equilibrium_in_class,
    integrate_dde,
    lemma_checks,
    min_profile,
    parse_network,
    stability_statement,
)
from netgen import random_weakly_reversible

OTHER_FACE_TEXT = """
2 A -> 3 A + B ; k=1
3 A + B -> A + 2 B ; k=1
A + 2 B -> 2 A ; k=2
C <-> 2 C ; k=1,1
"""


def test_certificate_example1(ex1, ex1_history):
    cert = certify(ex1, ex1_history)
    assert cert.verdict == "Persistent"
    assert set(cert.routes) == {"FaceClassification", "TwoDimCorollary"}
    faces = {entry.species: entry.face.tag for entry in cert.per_w}
    assert faces == {("X1",): FaceTag.FACET, ("X1", "X2"): FaceTag.VERTEX}
    assert all(entry.locking for entry in cert.per_w)
    assert cert.deficiency == 0 and cert.dim_s == 2 and cert.weakly_reversible
    assert cert.cb_residual <= 1e-10


def test_certificate_example1_without_history(ex1):
    # no conserved quantities: the class is the whole orthant, history optional
    assert certify(ex1).verdict == "Persistent"


def test_certificate_example2(ex2, ex2_history):
    cert = certify(ex2, ex2_history)
    assert cert.verdict == "Persistent"
    assert set(cert.routes) == {"FaceClassification", "TwoDimCorollary"}
    faces = {entry.species: entry.face.tag for entry in cert.per_w}
    assert faces[("X1", "X2")] is FaceTag.VERTEX
    assert faces[("X1", "X3")] is FaceTag.VERTEX
    assert faces[("X1", "X2", "X3")] is FaceTag.EMPTY
    assert any("empty face certifies persistence" in note for note in cert.notes)


def test_certificate_requires_history_with_conserved_quantities(ex2):
    with pytest.raises(PreconditionError, match="history"):
        certify(ex2, None)


def test_certificate_inconclusive_without_weak_reversibility():
    cert = certify(parse_network("A -> B ; k=1"))
    assert cert.verdict == "Inconclusive"
    assert cert.routes == ()
    assert cert.cb_residual is None
    assert "complex balance not established" in cert.notes[0]


def test_certificate_inconclusive_with_other_face():
    net = parse_network(OTHER_FACE_TEXT)
    psi = ConstantHistory([1.0, 1.0, 1.0], tau_max=net.tau_max)
    cert = certify(net, psi)
    assert cert.verdict == "Inconclusive"
    assert cert.routes == ()  # dim S = 3, no corollary either
    named = [note for note in cert.notes if "face dimension 1" in note]
    assert named, cert.notes
    assert cert.cb_residual is not None  # complex balance itself succeeded


def test_stability_statement_examples(ex1, ex1_history, ex2, ex2_history):
    cert1 = certify(ex1, ex1_history)
    st1 = stability_statement(ex1, ex1_history, cert1)
    assert st1.equilibrium.point == pytest.approx(
        [2.0 ** (1 / 3), 2.0 ** (-1 / 3)], abs=1e-9
    )
    cert2 = certify(ex2, ex2_history)
    st2 = stability_statement(ex2, ex2_history, cert2)
    assert st2.equilibrium.point == pytest.approx([2.13986456] * 3, abs=1e-6)
    assert st2.route in cert2.routes


def test_stability_statement_refuses_inconclusive():
    cert = certify(parse_network("A -> B ; k=1"))
    with pytest.raises(PreconditionError, match="persistence"):
        stability_statement(parse_network("A -> B ; k=1"), None, cert)


def test_lemma_checks_examples(ex1, ex2):
    assert lemma_checks(ex1).consistent
    assert lemma_checks(ex2).consistent
    assert lemma_checks(ex2).vertex_like == 3


def test_lemma_vertex_implies_locking_fuzz():
    rng = random.Random(1001)
    for _ in range(200):
        net = random_weakly_reversible(rng)
        report = lemma_checks(net)
        assert report.consistent, (net, report)


def test_certificate_agrees_with_dynamics(ex1, ex1_history, ex2, ex2_history):
    # persistent verdicts corroborated by simulation: minima stay positive
    for net, psi in ((ex1, ex1_history), (ex2, ex2_history)):
        cert = certify(net, psi)
        assert cert.verdict == "Persistent"
        target = equilibrium_in_class(net, psi).point
        traj = integrate_dde(net, psi, SolverConfig(step=0.005, t_end=30.0),
                             equilibrium=target)
        assert min_profile(traj, 10.0).min() > 0.0
        assert np.abs(traj.final_state - target).max() < 0.2
