import copy
import hashlib
import json

import pytest
from flint import fmpq
from hypothesis import given, settings
from hypothesis import strategies as st

from skewlattice import fixture_path
from skewlattice._linalg import LatticeError, index_of, q, qmat
from skewlattice.cli import main
from skewlattice.harness import (
    InstanceError,
    gen_instance,
    oracle_shortest,
    parse_instance,
    reduce_instance,
    serialize,
    verify_cert,
)
from skewlattice.hermforms import is_nondegenerate

FIXTURES = ["zi_rank1.json", "zi_hyperbolic.json", "lipschitz_rank1.json", "lipschitz_hyperbolic.json"]


def test_parse_bundled_fixture():
    inst = parse_instance(fixture_path("zi_rank1.json"))
    assert inst.m == 1 and inst.alg.albert_type == "IV" and inst.alg.d == 1


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip(name):
    inst = parse_instance(fixture_path(name))
    data = serialize(inst)
    again = parse_instance(json.dumps(data))
    assert serialize(again) == data
    assert again.lattice == inst.lattice and again.form.gram == inst.form.gram


def test_parse_rejects_half_trace():
    data = serialize(parse_instance(fixture_path("zi_rank1.json")))
    data["lattice"] = [["1/2", "0"], ["0", "1/2"]]
    with pytest.raises(InstanceError, match="trace form not integral"):
        parse_instance(data)


@pytest.mark.parametrize("mutate,message", [
    (lambda d: d["lattice"][0].__setitem__(0, "x/y"), "malformed rational"),
    (lambda d: d.pop("form"), "missing field"),
    (lambda d: d["form"].__setitem__("m", 3), "does not match"),
    (lambda d: d.__setitem__("lattice", [["1", "0"], ["2", "0"]]), "full rank"),
])
def test_parse_errors(mutate, message):
    data = serialize(parse_instance(fixture_path("zi_rank1.json")))
    mutate(data)
    with pytest.raises(InstanceError, match=message):
        parse_instance(data)


def _digest(inst):
    return hashlib.sha256(json.dumps(serialize(inst), sort_keys=True).encode()).hexdigest()


def test_gen_is_deterministic():
    a = gen_instance("IV", 1, 1, 2, 10, 42)
    b = gen_instance("IV", 1, 1, 2, 10, 42)
    assert _digest(a) == _digest(b)
    assert _digest(a) != _digest(gen_instance("IV", 1, 1, 2, 10, 43))
    q = gen_instance("III", 2, 1, 1, 5, 7)
    assert q.m == 1 and q.alg.albert_type == "III"
    with pytest.raises(InstanceError):
        gen_instance("IV", 1, 1, 1, 0, 1)


@settings(max_examples=25)
@given(st.sampled_from([("IV", 1, 1), ("III", 2, 1), ("IV", 1, 2), ("III", 2, 2)]),
       st.integers(1, 3), st.integers(1, 20), st.integers(0, 10 ** 6))
def test_generated_instances_are_valid(params, m, height, seed):
    t, d, e = params
    inst = gen_instance(t, d, e, m, height, seed)
    assert is_nondegenerate(inst.form)
    li = inst.lattice_instance()  # runs every exactness check
    assert li.disc_l > 0 and li.eta >= 1


def test_index_of_examples():
    Z2 = qmat([[1, 0], [0, 1]])
    assert index_of(qmat([[2, 0], [0, 2]]), Z2) == 4
    assert index_of(qmat([[1, 0], [1, 3]]), Z2) == 3
    with pytest.raises(LatticeError, match="not a sublattice"):
        index_of(qmat([[fmpq(1, 2), 0], [0, fmpq(1, 2)]]), Z2)


def test_oracle_examples():
    assert set(oracle_shortest([[1, 0], [0, 1]], 1)) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert oracle_shortest([[9, 0], [0, 9]], 4) == []
    with pytest.raises(ValueError):
        oracle_shortest([[1, 0], [0, 1]], 0)
    with pytest.raises(ValueError):
        oracle_shortest([[1, 0], [0, 1]], 10 ** 9, cap=10)


@pytest.mark.parametrize("name", FIXTURES)
def test_verify_accepts_fixture_certificates(name):
    inst = parse_instance(fixture_path(name))
    rep = verify_cert(inst, reduce_instance(inst).to_json())
    assert rep.passed, rep.to_json()


def _cert(name="zi_hyperbolic.json"):
    inst = parse_instance(fixture_path(name))
    return inst, reduce_instance(inst).to_json()


def test_perturbed_basis_fails_membership():
    inst, cert = _cert()
    bad = copy.deepcopy(cert)
    bad["basis"][0][0] = str(q(bad["basis"][0][0]) + fmpq(1, 3))
    rep = verify_cert(inst, bad)
    assert not rep.clauses["i"]


def test_forged_index_fails():
    inst, cert = _cert()
    bad = dict(cert, index=cert["index"] + 1)
    rep = verify_cert(inst, bad)
    assert not rep.clauses["iii"]
    assert rep.witnesses["index"] == cert["index"]
    assert rep.clauses["i"] and rep.clauses["ii"] and rep.clauses["iv"]


def test_forged_pairing_fails():
    inst, cert = _cert()
    bad = copy.deepcopy(cert)
    bad["pairings"][0][0] = ["0", "5"]
    assert not verify_cert(inst, bad).clauses["iv"]


def test_forged_discriminant_fails():
    inst, cert = _cert()
    assert not verify_cert(inst, dict(cert, disc_L=cert["disc_L"] + 1)).clauses["iii"]


def test_non_orthogonal_basis_fails():
    inst, cert = _cert()
    bad = copy.deepcopy(cert)
    bad["basis"] = [["1", "0", "0", "0"], ["0", "0", "1", "0"]]
    bad["pairings"] = None
    rep = verify_cert(inst, bad)
    assert not rep.clauses["ii"]


def test_dimension_mismatch_raises():
    inst, cert = _cert()
    with pytest.raises(InstanceError, match="dimensions"):
        verify_cert(inst, dict(cert, basis=cert["basis"][:1]))


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_cli_reduce_and_verify(tmp_path, capsys):
    inst_path = fixture_path("zi_hyperbolic.json")
    cert_path = str(tmp_path / "cert.json")
    assert main(["reduce", str(inst_path), "-o", cert_path]) == 0
    assert main(["verify", str(inst_path), cert_path]) == 0
    cert = json.loads(open(cert_path).read())
    forged = _write(tmp_path, "forged.json", dict(cert, index=cert["index"] + 1))
    assert main(["verify", str(inst_path), forged]) == 1


def test_cli_batch_reduce(tmp_path, capsys):
    paths = [str(fixture_path(n)) for n in FIXTURES]
    assert main(["--parallel", "2", "reduce", *paths]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [json.loads(line)["instance"] for line in lines] == paths


def test_cli_input_errors(tmp_path, capsys):
    assert main(["reduce", str(tmp_path / "missing.json")]) == 2
    assert main(["gen", "--type", "IV", "--height", "0"]) == 2
    bad = serialize(parse_instance(fixture_path("zi_rank1.json")))
    bad["lattice"] = [["1/2", "0"], ["0", "1/2"]]
    assert main(["reduce", _write(tmp_path, "bad.json", bad)]) == 2
    assert main(["signature", str(fixture_path("lipschitz_rank1.json"))]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_signature_and_oracle(capsys):
    assert main(["signature", str(fixture_path("zi_rank1.json"))]) == 0
    out = capsys.readouterr().out
    assert "signature (1,)" in out and "0+1i" in out
    assert main(["oracle", "shortest", "[[2,1],[1,2]]", "2"]) == 0
    got = {tuple(v) for v in json.loads(capsys.readouterr().out)}
    assert got == {(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)}


def test_cli_gen_and_constants(tmp_path, capsys):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["gen", "--type", "IV", "-m", "2", "--seed", "42", "-o", a]) == 0
    assert main(["gen", "--type", "IV", "-m", "2", "--seed", "42", "-o", b]) == 0
    assert open(a).read() == open(b).read()
    assert main(["gen", "--type", "III", "--count", "3", "--seed", "1", "-o", str(tmp_path / "batch")]) == 0
    assert len(list((tmp_path / "batch").glob("*.json"))) == 3
    assert main(["constants", "--type", "IV", "-m", "2"]) == 0
    c = json.loads(capsys.readouterr().out)
    assert c["c_psi_eta"] == "3" and c["c_psi_L"] == "3/2"
