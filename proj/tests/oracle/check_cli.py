#!/usr/bin/env python3
# Copyright 2026 The lfqa Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Runs `lfqa pipeline` on the toy fixture twice and compares every output
with the committed goldens; the second run must resume from the manifest."""

import argparse
import filecmp
import shutil
import subprocess
import sys
import time
from pathlib import Path


def run(cli, config, work):
    start = time.monotonic()
    proc = subprocess.run([cli, "pipeline", "--config", config, "--output-dir", str(work)],
                          capture_output=True, text=True)
    elapsed = time.monotonic() - start
    sys.stdout.write(proc.stdout)
    sys.stderr.write(proc.stderr)
    return proc.returncode, proc.stdout, elapsed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--config", required=True)
    ap.add_argument("--golden", required=True)
    ap.add_argument("--work", required=True)
    args = ap.parse_args()

    work = Path(args.work)
    shutil.rmtree(work, ignore_errors=True)
    code, _, elapsed = run(args.cli, args.config, work)
    if code != 0:
        print(f"pipeline exited with {code}")
        return 1
    print(f"pipeline finished in {elapsed:.2f}s")
    failures = 0
    for golden in sorted(Path(args.golden).iterdir()):
        produced = work / golden.name
        same = produced.exists() and filecmp.cmp(golden, produced, shallow=False)
        print(f"{'same' if same else 'DIFFERENT'}: {golden.name}")
        failures += not same

    manifest = (work / "manifest.json").read_bytes()
    code, out, _ = run(args.cli, args.config, work)
    resumed = code == 0 and out.count("up to date") == 5
    unchanged = (work / "manifest.json").read_bytes() == manifest
    print(f"resume: {'ok' if resumed and unchanged else 'FAILED'}")
    failures += not (resumed and unchanged)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
