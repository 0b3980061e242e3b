"""Validate a report JSON against schemas/report.schema.json."""
import json
import sys

import jsonschema


def main() -> int:
    schema_path, report_path = sys.argv[1], sys.argv[2]
    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)
    with open(report_path, encoding="utf-8") as f:
        report = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(report), key=str)
    for e in errors:
        print(f"{list(e.path)}: {e.message}")
    print("valid" if not errors else f"{len(errors)} schema violation(s)")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
