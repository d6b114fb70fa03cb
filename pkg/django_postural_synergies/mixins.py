import copy
import json
from pathlib import Path

from django.template.loader import render_to_string

from django_postural_synergies.settings import synergy_settings

JSON_ARTIFACT = 1
SVG_ARTIFACT = 2
CSV_ARTIFACT = 3

FLOAT_FORMAT = "%.17g"

SUFFIXES = {
    JSON_ARTIFACT: "json",
    SVG_ARTIFACT: "svg",
    CSV_ARTIFACT: "csv",
}


class Artifact:
    """
    A named pipeline output that can be rendered as JSON data, a CSV table or an SVG plot
    """
    artifact_type = JSON_ARTIFACT
    template_name = None

    _payload = None

    def __init__(self, name: str, provenance: dict = None) -> None:
        self.name = name
        self.provenance = dict(provenance or {})

    @property
    def json_encoder(self):
        return synergy_settings.JSON_ENCODER

    @property
    def payload(self):
        return self.get_payload()

    @property
    def json_payload(self):
        return self.get_payload(fmt="json")

    @property
    def svg_payload(self):
        return self.get_payload(fmt="svg")

    @property
    def csv_payload(self):
        return self.get_payload(fmt="csv")

    @property
    def filename(self):
        return f"{self.name}.{SUFFIXES[self.artifact_type]}"

    def get_payload(self, fmt=None):
        payload = copy.deepcopy(self._payload)
        if fmt == "json":
            payload = self._get_json_payload(payload)
        elif fmt == "svg":
            payload = self._get_svg_payload()
        elif fmt == "csv":
            payload = self._get_csv_payload()
        return payload

    def get_context_data(self):
        raise NotImplementedError

    def get_dataframe(self):
        raise NotImplementedError

    def get_json_dump_kwargs(self):
        return {
            "indent": 2,
            "sort_keys": True,
            "allow_nan": False
        }

    def get_provenance_line(self):
        return ",".join(f"{key}={self.provenance[key]}" for key in sorted(self.provenance))

    def _get_json_payload(self, payload):
        data = {
            "provenance": self.provenance,
            "data": payload
        }
        kwargs = {
            "cls": self.json_encoder
        }
        kwargs.update(**self.get_json_dump_kwargs())
        return json.dumps(data, **kwargs) + "\n"

    def _get_svg_payload(self):
        context = self.get_context_data()
        context["provenance"] = self.get_provenance_line()
        return render_to_string(self.template_name, context=context)

    def _get_csv_payload(self):
        table = self.get_dataframe().to_csv(index=False, float_format=FLOAT_FORMAT)
        return f"# {self.get_provenance_line()}\n{table}"

    def render(self):
        if self.artifact_type == SVG_ARTIFACT:
            return self.svg_payload
        if self.artifact_type == CSV_ARTIFACT:
            return self.csv_payload
        return self.json_payload

    def write(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / self.filename
        path.write_text(self.render(), encoding="utf-8")
        return path


class DataArtifact(Artifact):
    def __init__(self, name: str, data, provenance: dict = None) -> None:
        super().__init__(name, provenance)
        self._payload = data


class TableArtifact(Artifact):
    artifact_type = CSV_ARTIFACT

    def __init__(self, name: str, frame, provenance: dict = None) -> None:
        super().__init__(name, provenance)
        self.frame = frame

    def get_dataframe(self):
        return self.frame
