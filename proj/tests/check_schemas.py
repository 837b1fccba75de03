#!/usr/bin/env python3
# Copyright 2026 The bodycomp Authors
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

"""Validates CLI JSON outputs and the shipped configs against docs/*.schema.json."""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    cli, docs, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)

    report_schema = load(docs / "report.schema.json")
    config_schema = load(docs / "train_config.schema.json")
    jsonschema.Draft202012Validator.check_schema(report_schema)
    jsonschema.Draft202012Validator.check_schema(config_schema)

    subprocess.run([cli, "--seed", "11", "phantom", "--out", str(work / "ph"), "--nz", "12", "--size", "48"],
                   check=True, stdout=subprocess.DEVNULL)
    subprocess.run([cli, "quantify", "--hu", str(work / "ph" / "phantom_000_hu.vbc"), "--labels",
                    str(work / "ph" / "phantom_000_labels.vbc"), "--out", str(work / "rep"),
                    "--checkpoint-hash", "0123456789abcdef"],
                   check=True, stdout=subprocess.DEVNULL)

    jsonschema.validate(load(work / "rep" / "report.json"), report_schema)
    jsonschema.validate(load(work / "ph" / "phantom_000_composition.json"), report_schema)
    jsonschema.validate(load(docs / "desk_config.json"), config_schema)

    bad = load(docs / "desk_config.json")
    bad["learning_rate"] = 1
    try:
        jsonschema.validate(bad, config_schema)
    except jsonschema.ValidationError:
        pass
    else:
        raise SystemExit("schema accepted an unknown config key")
    print("schemas ok")


if __name__ == "__main__":
    main()
