import json
import os
import pathlib
import shutil

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "schemas"
DATA = ROOT / "data"


@pytest.fixture(scope="session")
def validate():
    docs = {p.name: json.loads(p.read_text()) for p in SCHEMAS.glob("*.schema.json")}
    registry = Registry().with_resources((name, Resource.from_contents(d)) for name, d in docs.items())

    def check(doc, schema_name):
        Draft202012Validator(docs[schema_name + ".schema.json"], registry=registry).validate(doc)

    return check


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("CWHOM_CLI") or shutil.which("cwhom") or str(ROOT / "build" / "cwhom")
    if not pathlib.Path(exe).exists():
        pytest.skip("cwhom executable not built")
    return str(pathlib.Path(exe).resolve())
