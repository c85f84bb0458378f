import torch

from dataclasses import fields, is_dataclass


class BaseModel(torch.nn.Module):
    def __init__(self):
        super(BaseModel, self).__init__()

    def compute_loss(self, data=None, reduction='mean') -> torch.Tensor:
        assert reduction in ('mean', 'sum', None), f'invalid reduction approach {reduction}'
        raise NotImplementedError

    def pred(self, data=None):
        raise NotImplementedError


class BaseCertificate(object):
    """
    machine-checkable record of a certification run; subclasses are frozen
    dataclasses and decide their own verdict
    """
    @property
    def passed(self) -> bool:
        raise NotImplementedError

    def to_dict(self, exact=False):
        from .utils import to_jsonable
        assert is_dataclass(self), f"{type(self).__name__} must be a dataclass"
        out = {f.name: to_jsonable(getattr(self, f.name), exact) for f in fields(self) if f.repr}
        out["passed"] = self.passed
        return out
