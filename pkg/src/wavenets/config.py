"""Flat ``key = value`` run configuration files."""
from dataclasses import asdict, dataclass, fields
from importlib import resources

from .nn.model import ModelConfig
from .nn.train import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # optimisation
    epochs: int = 30
    batch_size: int = 64
    lr0: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4
    label_smoothing: float = 0.1
    restart_period: int = 10
    lr_decay_on_restart: float = 0.9
    seed: int = 1
    # model
    squeeze_mode: str = "wavenet_c"
    d: int = 2
    scale_factor: int = 8
    reduction: int = 4
    block: str = "basic"
    blocks_per_stage: int = 1
    # data
    dataset: str = "synthetic"
    num_classes: int = 4
    n_samples: int = 2000
    data_seed: int = 1
    train_ratio: float = 0.8
    idx_images: str = ""
    idx_labels: str = ""

    def train_config(self):
        return TrainConfig(**{f.name: getattr(self, f.name) for f in fields(TrainConfig)})

    def model_config(self, in_channels=1):
        kw = {f.name: getattr(self, f.name) for f in fields(ModelConfig) if f.name != "in_channels"}
        return ModelConfig(in_channels=in_channels, **kw)

    def dumps(self):
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def _coerce(key, text, lineno):
    kind = _TYPES[key]
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects {kind.__name__}, got {text!r}") from None
    return text


def parse(text, base=None):
    """Parse config text; unknown keys and malformed lines raise :class:`ConfigError`."""
    values = asdict(base) if base is not None else {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value, lineno)
    try:
        cfg = RunConfig(**values)
        cfg.train_config()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load(path, base=None):
    with open(path) as fh:
        return parse(fh.read(), base)


def default():
    """The shipped default configuration."""
    return parse(resources.files("wavenets").joinpath("default.cfg").read_text())
