"""Server configuration: one role, one model, served over standard streams."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

ROLES = ("reader", "classifier", "corrector", "embedder")

# ops answered by each role
ROLE_OPS = {
    "reader": ("read",),
    "classifier": ("classify",),
    "corrector": ("correct",),
    "embedder": ("embed",),
}


@dataclass
class AdapterConfig:
    role: str
    model: str = "hash"
    device: str = "cpu"
    max_length: int = 512
    prompt_path: Path | None = None
    demos_path: Path | None = None
    n_demos: int = 3
    use_bm25: bool = False
    llm_base_url: str = "https://api.openai.com/v1"
    llm_api_key_env: str = "OPENAI_API_KEY"
    llm_timeout: float = 60.0

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.max_length < 16:
            raise ValueError(f"max_length must be >= 16, got {self.max_length}")
        if self.prompt_path is not None:
            self.prompt_path = Path(self.prompt_path)
        if self.demos_path is not None:
            self.demos_path = Path(self.demos_path)

    @property
    def ops(self) -> tuple[str, ...]:
        return ROLE_OPS[self.role]
