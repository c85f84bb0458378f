import math

from collections import defaultdict
from dataclasses import dataclass, asdict
from .errors import InvalidInput


class Config(object):
    """
    attribute bag built from dotted keys, Config(**{'tolerance.eps_len': 1e-9}).tolerance.eps_len
    """
    def __init__(self, **kwargs):
        kws_next = defaultdict(dict)

        for key, value in kwargs.items():
            if len(key.split('.', 1)) > 1:
                key, sub_key = key.split('.', 1)
                kws_next[key][sub_key] = value
                continue

            setattr(self, key, value)

        for k in kws_next:
            setattr(self, k, Config(**kws_next[k]))

    def to_dict(self, prefix=''):
        """
        flatten back into dotted keys
        """
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, Config):
                out.update(v.to_dict(prefix=f"{prefix}{k}."))
            else:
                out[f"{prefix}{k}"] = v
        return out

    def get(self, key, default=None):
        node = self
        for part in key.split('.'):
            if not hasattr(node, part):
                return default
            node = getattr(node, part)
        return node

    def __repr__(self):
        return str(self.__dict__)


@dataclass(frozen=True)
class ToleranceConfig:
    eps_len: float = 1e-9
    eps_angle: float = 1e-9
    eps_field: float = 1e-12

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidInput(f"tolerance {name} must be a positive finite number, got {value!r}")

    @classmethod
    def from_config(cls, config: Config = None) -> 'ToleranceConfig':
        if config is None:
            return cls()
        params = {k: v for k, v in config.__dict__.items() if k in cls.__dataclass_fields__ and v is not None}
        return cls(**params)

    def to_dict(self):
        return asdict(self)


DEFAULT_TOLERANCE = ToleranceConfig()
