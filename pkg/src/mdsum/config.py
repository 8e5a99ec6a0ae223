"""Run configuration: INI-style sections of key = value pairs plus command-line overrides."""
from __future__ import annotations

import configparser
import io
from dataclasses import replace
from pathlib import Path

from .attention import AttentionConfig
from .decoder import GenerationConfig
from .errors import ConfigError
from .model import ModelConfig
from .training import TrainConfig

DEFAULTS = {
    "model": {"embed_dim": 64, "hidden_dim": 64, "max_vocab": 30000, "min_freq": 1, "seed": 0},
    "attention": {"mode": "concentrated", "K": 15, "lambda": 0.9},
    "docset": {"mode": "learned"},
    "decode": {"max_sentences": 10, "max_words": 40, "budget": 100, "beam": 1},
    "train": {"epochs": 20, "batch_size": 1, "lr": 1e-3, "early_stop": "rouge1", "patience": 2,
              "seed": 0, "tune_projection": False},
    "pipeline": {"name": "ours", "intermediate_budget": 100, "final_budget": 100},
    "run": {"workers": 1, "split": "test"},
}


def _convert(section, key, raw):
    default = DEFAULTS[section][key]
    try:
        if isinstance(default, bool):
            low = str(raw).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return type(default)(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {section}.{key}") from exc


class RunConfig:
    """Fully-resolved configuration. Every key has a default; ``explicit`` records overridden keys."""

    def __init__(self):
        self.values = {s: dict(kv) for s, kv in DEFAULTS.items()}
        self.explicit = set()

    def set(self, section, key, raw, source="override"):
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}] ({source})")
        if key not in DEFAULTS[section]:
            raise ConfigError(f"unknown config key {section}.{key} ({source})")
        self.values[section][key] = _convert(section, key, raw)
        self.explicit.add((section, key))

    def get(self, section, key):
        return self.values[section][key]

    def __getitem__(self, dotted):
        section, _, key = dotted.partition(".")
        return self.get(section, key)

    @classmethod
    def load(cls, path=None, overrides=()):
        cfg = cls()
        if path is not None:
            parser = configparser.ConfigParser()
            parser.optionxform = str
            try:
                with open(path, encoding="utf-8") as fh:
                    parser.read_file(fh)
            except (OSError, configparser.Error) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            for section in parser.sections():
                for key, raw in parser.items(section):
                    cfg.set(section, key, raw, source=str(path))
        for item in overrides:
            dotted, sep, raw = item.partition("=")
            section, dot, key = dotted.strip().partition(".")
            if not sep or not dot:
                raise ConfigError(f"override {item!r} is not of the form section.key=value")
            cfg.set(section, key.strip(), raw.strip())
        return cfg

    def to_ini(self):
        parser = configparser.ConfigParser()
        parser.optionxform = str
        for section, kv in self.values.items():
            parser[section] = {k: str(v).lower() if isinstance(v, bool) else str(v) for k, v in kv.items()}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def write(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "config.ini").write_text(self.to_ini(), encoding="utf-8")

    def attention_config(self):
        a = self.values["attention"]
        try:
            return AttentionConfig(a["mode"], a["K"], a["lambda"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def model_config(self):
        m = self.values["model"]
        try:
            return ModelConfig(m["embed_dim"], m["hidden_dim"], self.attention_config(), self.values["docset"]["mode"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def generation_config(self):
        d = self.values["decode"]
        try:
            return GenerationConfig(d["max_sentences"], d["max_words"], d["budget"], d["beam"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def train_config(self, mode):
        t = self.values["train"]
        return TrainConfig(mode=mode, epochs=t["epochs"], batch_size=t["batch_size"], lr=t["lr"],
                           early_stop=t["early_stop"], patience=t["patience"], seed=t["seed"],
                           tune_projection=t["tune_projection"])

    def apply_to_model(self, model):
        """Override a loaded model's attention/docset settings with explicitly configured keys."""
        changes = {}
        if any(s == "attention" for s, _ in self.explicit):
            changes["attention"] = self.attention_config()
        if ("docset", "mode") in self.explicit:
            changes["docset_mode"] = self.values["docset"]["mode"]
        if changes:
            try:
                model.config = replace(model.config, **changes)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return model
