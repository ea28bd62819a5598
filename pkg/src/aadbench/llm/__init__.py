from .clients import (
    LlmError,
    LlmRequest,
    LlmResponse,
    OpenAIChatClient,
    QueryLogger,
    RateLimiter,
    TransientLlmError,
    generate,
    word_count,
)
from .mock import MockLLM, classify_instruction
from .parsing import ParseError, ParsedCandidate, parse_response
from .prompts import (
    DEFAULT_MUTATION_PROMPTS,
    PromptConfigError,
    build_mutation_prompt,
    build_task_prompt,
)

__all__ = [
    "LlmError", "LlmRequest", "LlmResponse", "OpenAIChatClient", "QueryLogger", "RateLimiter",
    "TransientLlmError", "generate", "word_count", "MockLLM", "classify_instruction", "ParseError",
    "ParsedCandidate", "parse_response", "DEFAULT_MUTATION_PROMPTS", "PromptConfigError",
    "build_mutation_prompt", "build_task_prompt",
]
