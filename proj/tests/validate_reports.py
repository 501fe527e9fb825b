"""Runs the CLI end to end and validates every JSON report against the schema."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def run(cli, *args):
    subprocess.run([cli, *args], check=True)


def main():
    cli, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        run(cli, "synth", "--records", "1500", "--cardinalities", "2,3,4,2", "--planted", "f0=c0;f2=c1|c3",
            "--seed", "5", "--out", str(out))
        csv = str(out / "cohort.csv")
        common = ["--input", csv, "--replicates", "19", "--restarts", "5", "--seed", "8"]
        run(cli, "scan", *common, "--out", str(out / "scan"))
        report = str(out / "scan" / "scan.json")
        run(cli, "rank", *common, "--scan-report", report, "--reference", "unity", "--out", str(out / "rank"))
        run(cli, "substitute", *common, "--scan-report", report, "--out", str(out / "sub"))
        run(cli, "pipeline", *common, "--workers", "2", "--out", str(out / "pipe"))
        files = [out / "scan" / "scan.json", out / "rank" / "relevance.json", out / "sub" / "substitutions.json",
                 out / "pipe" / "report.json"]
        for f in files:
            validator.validate(json.loads(f.read_text()))
            print(f"valid: {f.name}")
        planted = json.loads((out / "planted.json").read_text())
        assert planted["command"] == "synth" and planted["planted"], planted


if __name__ == "__main__":
    main()
