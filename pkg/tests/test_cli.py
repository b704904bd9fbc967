import json

import pytest

from alignverify.cli import main

from corpus import CORPUS


def c(name):
    return str(CORPUS / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_prints_labels(capsys):
    code, out, _ = run(capsys, "parse", c("c0.imp"))
    assert code == 0
    assert "1: y := x; 2: z := 1; 3: while y != 0" in out


def test_run_reports_final_store(capsys):
    code, out, _ = run(capsys, "run", c("c0.imp"), "--store", "x=4", "--format", "json")
    assert code == 0
    r = json.loads(out)
    assert r["status"] == "holds"
    assert "24" in json.dumps(r)


def test_cfg_segments(capsys):
    code, out, _ = run(capsys, "cfg", c("c0.imp"), "--cutset", "3")
    assert code == 0
    assert "3 -> 4 -> 5 -> 3" in out or "[3, 4, 5, 3]" in out


def test_cfg_uncut_loop_reported_with_cycle(capsys):
    code, out, _ = run(capsys, "cfg", c("c0.imp"), "--cutset", "2")
    assert code == 1 and "3 -> 4 -> 5 -> 3" in out


def test_check_sec7(capsys):
    code, out, _ = run(capsys, "check", c("c4.imp"), c("c5.imp"), "--kind", "caloop:4",
                       "--guards", f"{c('sec7_lam.frm')},{c('sec7_rho.frm')}",
                       "--ann", c("sec7.ann"))
    assert code == 0
    assert out.rstrip().splitlines()[-1].startswith("RESULT: holds")


def test_check_reach_mode(capsys):
    code, out, _ = run(capsys, "check", c("c4.imp"), c("c5.imp"), "--kind", "caloop:4",
                       "--guards", f"{c('sec7_lam.frm')},{c('sec7_rho.frm')}",
                       "--ann", c("sec7.ann"), "--mode", "reach", "--domain", "4..6",
                       "--inputs", "x,x'", "--format", "json")
    assert code == 0
    assert json.loads(out)["status"] == "holds"


def test_verify_fails_with_trace(capsys):
    code, out, _ = run(capsys, "verify", c("c0.imp"), "--pre", "x = 3", "--post", "z = 5",
                       "--domain", "0..4")
    assert code == 1
    assert "RESULT: fails" in out


def test_verify_rel_nondeterminism(capsys):
    code, out, _ = run(capsys, "verify-rel", c("choice_bad.imp"), c("choice_bad.imp"),
                       "--pre", "x = x'", "--post", "x = x'", "--domain", "-2..2")
    assert code == 1
    code, out, _ = run(capsys, "verify-rel", c("choice_ok.imp"), c("choice_ok.imp"),
                       "--pre", "x = x'", "--post", "x = x'", "--domain", "-2..2")
    assert code == 0


def test_adequacy_counterexample(capsys):
    code, out, _ = run(capsys, "adequacy", c("c0.imp"), c("c0.imp"), "--kind", "olck",
                       "--pre", "x = 2 && x' = 3", "--domain", "0..4")
    assert code == 1


def test_inconclusive_exit_code(capsys):
    code, out, _ = run(capsys, "verify", c("c0.imp"), "--pre", "x = -1", "--post", "true",
                       "--domain", "-1..1", "--max-steps", "50")
    assert code == 3


def test_extract_and_check_derivation(capsys, tmp_path):
    out_file = tmp_path / "d.sexp"
    code, _, _ = run(capsys, "extract", c("c4.imp"), c("c5.imp"), "--theorem", "cawhile",
                     "--beg", "4", "--guards", f"{c('sec7_lam.frm')},{c('sec7_rho.frm')}",
                     "--ann", c("sec7.ann"), "-o", str(out_file))
    assert code == 0 and out_file.exists()
    code, out, _ = run(capsys, "check-deriv", str(out_file))
    assert code == 0
    # a one-character change in a leaf is caught
    text = out_file.read_text()
    assert "w mod 2 != 0" in text
    out_file.write_text(text.replace("w mod 2 != 0", "w mod 4 != 0", 1))
    code, out, _ = run(capsys, "check-deriv", str(out_file))
    assert code == 1
    assert "rejected at root" in out


def test_extract_refusal_exit_code(capsys):
    code, out, err = run(capsys, "extract", c("c4.imp"), c("c5.imp"), "--theorem", "lockstep",
                         "--ann", c("c4c5_lockstep.ann"))
    assert code == 1
    assert "branch point 5" in out + err


def test_extract_lockstep_seq(capsys):
    code, _, _ = run(capsys, "extract", c("sec6_left.imp"), c("sec6_right.imp"),
                     "--theorem", "lockstep-seq", "--hole", "2,0", "--ann", c("sec6.ann"))
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["parse", "/nonexistent.imp"],
    ["verify", "--pre", "x > 0"],
    ["check", "c0.imp", "--ann"],
    ["nosuchcommand"],
])
def test_usage_errors(capsys, argv):
    argv = [c(a) if a.endswith(".imp") and not a.startswith("/") else a for a in argv]
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_bad_domain(capsys):
    code, _, err = run(capsys, "verify", c("c0.imp"), "--pre", "true", "--post", "true",
                       "--domain", "5..1")
    assert code == 2


def test_json_report_keys(capsys):
    code, out, _ = run(capsys, "check", c("c0.imp"), c("c0.imp"), "--kind", "lckctl",
                       "--ann", c("c0_lockstep.ann"), "--domain", "0..4", "--format", "json")
    r = json.loads(out)
    assert code == 0
    assert {"command", "status", "detail", "bounds", "seconds"} <= set(r)
