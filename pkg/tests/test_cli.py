import json
import subprocess
import sys

import pytest

from motivelog import io as mio
from motivelog.cli import main


def run_cli(args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "motivelog.cli", *args],
        capture_output=True,
        text=True,
        **kw,
    )


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A small generated corpus plus fixture files, shared by CLI tests."""
    path = tmp_path_factory.mktemp("cli")
    code = main(
        [
            "gen",
            "--seed",
            "12",
            "--participants",
            "6",
            "--days",
            "2",
            "--out",
            str(path / "events.jsonl"),
            "--truth",
            str(path / "truth.tsv"),
            "--fixtures",
            str(path / "fx"),
        ]
    )
    assert code == 0
    return path


def test_gen_is_deterministic_across_processes(tmp_path):
    for name in ("a", "b"):
        result = run_cli(
            ["gen", "--seed", "4", "--participants", "3", "--days", "1",
             "--out", str(tmp_path / f"{name}.jsonl")]
        )
        assert result.returncode == 0, result.stderr
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_unknown_subcommand_exits_1():
    result = run_cli(["frobnicate"])
    assert result.returncode == 1
    assert "usage" in result.stderr.lower()


def test_unknown_flag_exits_1():
    result = run_cli(["gen", "--seed", "1", "--nope"])
    assert result.returncode == 1


def test_missing_input_file_exits_2(workdir):
    code = main(
        ["abstract", "--dict", str(workdir / "fx/dict.dic"),
         "--whitelist", str(workdir / "no-such-file.txt"),
         "--in", str(workdir / "events.jsonl"), "--out", str(workdir / "w.jsonl")]
    )
    assert code == 2


def test_full_chain_and_manifests(workdir):
    fx = workdir / "fx"
    steps = [
        ["abstract", "--dict", str(fx / "dict.dic"), "--whitelist", str(fx / "whitelist.txt"),
         "--in", str(workdir / "events.jsonl"), "--out", str(workdir / "words.jsonl")],
        ["sessions", "--events", str(workdir / "events.jsonl"), "--appcats", str(fx / "appcats.tsv"),
         "--in", str(workdir / "words.jsonl"), "--out", str(workdir / "sessions.jsonl")],
        ["prefilter", "--in", str(workdir / "sessions.jsonl"),
         "--out", str(workdir / "filtered.jsonl"), "--report", str(workdir / "redactions.json")],
        ["classify", "--mapping", str(fx / "mapping.tsv"),
         "--in", str(workdir / "filtered.jsonl"), "--out", str(workdir / "classified.jsonl")],
        ["stats", "--in", str(workdir / "classified.jsonl"),
         "--out", str(workdir / "stats.json"), "--tsv", str(workdir / "stats.tsv")],
        ["compare", "--in", str(workdir / "classified.jsonl"),
         "--out", str(workdir / "compare.json"), "--tsv", str(workdir / "compare.tsv")],
        ["longtail", "--in", str(workdir / "classified.jsonl"),
         "--out", str(workdir / "longtail.json"), "--tsv", str(workdir / "longtail.tsv"),
         "--k", "5"],
    ]
    for step in steps:
        assert main(step) == 0, step[0]

    stats = json.loads((workdir / "stats.json").read_text())
    assert stats["n_records"] > 0
    assert 0 < stats["coverage"]["prompt_rate"] < 1
    assert (workdir / "stats.tsv").read_text().startswith("group_by\t")
    # figures rendered alongside the delimited output by default
    assert (workdir / "stats.words.png").exists()
    assert (workdir / "compare.rates.png").exists()
    assert (workdir / "longtail.curve.png").exists()

    manifest = json.loads((workdir / "stats.json.manifest.json").read_text())
    assert manifest["command"] == "stats"
    assert str(workdir / "classified.jsonl") in manifest["inputs"]
    assert len(manifest["inputs"][str(workdir / "classified.jsonl")]) == 64


def test_no_figures_flag(workdir):
    out = workdir / "nofig.json"
    assert main(
        ["stats", "--in", str(workdir / "classified.jsonl"), "--out", str(out),
         "--tsv", str(workdir / "nofig.tsv"), "--no-figures"]
    ) == 0
    assert not (workdir / "nofig.words.png").exists()


def test_stdin_stdout_streaming(workdir):
    fx = workdir / "fx"
    events = (workdir / "events.jsonl").read_text()
    result = run_cli(
        ["abstract", "--dict", str(fx / "dict.dic"), "--whitelist", str(fx / "whitelist.txt")],
        input=events,
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout == (workdir / "words.jsonl").read_text()
    # manifest goes to stderr when streaming
    assert '"command": "abstract"' in result.stderr


def test_words_jsonl_has_no_raw_tokens(workdir):
    # every non-whitelisted typed token must be absent from the output
    from motivelog.abstractor import tokenize

    whitelist = mio.load_whitelist(workdir / "fx/whitelist.txt")
    words_text = (workdir / "words.jsonl").read_text()
    with open(workdir / "events.jsonl", encoding="utf-8") as fp:
        for event in mio.read_events(fp):
            for token in tokenize(event.content):
                folded = token.casefold()
                if len(token) >= 2 and folded not in whitelist:
                    assert token not in words_text


def test_autocode_subcommand(workdir):
    assert main(
        ["autocode", "--in", str(workdir / "classified.jsonl"),
         "--out", str(workdir / "auto-mapping.tsv"),
         "--residual", str(workdir / "residual.tsv"), "--cutoff", "0"]
    ) == 0
    mapping = mio.load_mapping(workdir / "auto-mapping.tsv")
    assert len(mapping) > 0
    residual = (workdir / "residual.tsv").read_text()
    assert residual.startswith("#")


def test_kappa_subcommand(tmp_path):
    (tmp_path / "a.tsv").write_text(
        "p1\tMessaging\np2\tSearch\np3\tOther\n", encoding="utf-8"
    )
    (tmp_path / "b.tsv").write_text(
        "p1\tMessaging\np2\tSearch\np3\tAmbiguous\n", encoding="utf-8"
    )
    out = tmp_path / "kappa.json"
    assert main(["kappa", "--a", str(tmp_path / "a.tsv"), "--b", str(tmp_path / "b.tsv"),
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["n"] == 3
    assert report["overall"]["po"] == pytest.approx(2 / 3)
    assert len(report["disagreements"]) == 1
