"""Substitution-model backends.

A backend maps a rendered prompt string to a raw completion string and knows
nothing about entities or pools. The two mock backends exist to make runs
reproducible without a model: they parse the demonstrations back out of the
prompt and answer from them. The command backend shells out to any local
model runner.

Per-call failures raise BackendInvocationError; once a backend accumulates
`failure_threshold` consecutive failures it turns unhealthy and every later
call raises BackendUnhealthy, which callers are expected not to swallow.
"""

from __future__ import annotations

import shlex
import subprocess
import threading
from abc import ABC, abstractmethod
from pathlib import Path

from .prompting import splitmix64, stable_seed

DEFAULT_TIMEOUT = 60.0
DEFAULT_FAILURE_THRESHOLD = 5


class BackendInvocationError(RuntimeError):
    """One call failed: transport error, timeout, or nonzero exit."""


class BackendUnhealthy(RuntimeError):
    """Too many consecutive failures; the backend refuses further calls."""


class SlmBackend(ABC):
    """Base class handling concurrency limits and health accounting."""

    id: str

    def __init__(
        self,
        *,
        max_inflight: int = 1,
        failure_threshold: int = DEFAULT_FAILURE_THRESHOLD,
    ) -> None:
        if max_inflight < 1:
            raise ValueError("max_inflight must be at least 1")
        self.failure_threshold = failure_threshold
        self._semaphore = threading.BoundedSemaphore(max_inflight)
        self._health_lock = threading.Lock()
        self._consecutive_failures = 0
        self._unhealthy = False

    @abstractmethod
    def _invoke(self, prompt: str) -> str:
        """Produce a raw completion; may raise BackendInvocationError."""

    def propose(self, prompt: str) -> str:
        with self._health_lock:
            if self._unhealthy:
                raise BackendUnhealthy(
                    f"backend {self.id}: disabled after "
                    f"{self._consecutive_failures} consecutive failures"
                )
        with self._semaphore:
            try:
                completion = self._invoke(prompt)
            except BackendInvocationError as exc:
                with self._health_lock:
                    self._consecutive_failures += 1
                    if self._consecutive_failures >= self.failure_threshold:
                        self._unhealthy = True
                        raise BackendUnhealthy(
                            f"backend {self.id}: {self._consecutive_failures} "
                            f"consecutive failures, last: {exc}"
                        ) from exc
                raise
        with self._health_lock:
            self._consecutive_failures = 0
        return completion


def parse_prompt(prompt: str) -> tuple[list[tuple[str, str]], str]:
    """Recover (demo pairs, input) from a rendered prompt.

    Raises BackendInvocationError when the prompt does not follow the
    Real:/Fake: alternation, so mocks fail like a confused model would.
    """
    reals: list[str] = []
    fakes: list[str] = []
    for line in prompt.split("\n"):
        if line.startswith("Real: "):
            reals.append(line[len("Real: ") :])
        elif line.startswith("Fake: "):
            fakes.append(line[len("Fake: ") :])
        elif line == "Fake:" or line == "":
            continue
        else:
            raise BackendInvocationError(f"unparseable prompt line: {line!r}")
    if len(reals) != len(fakes) + 1 or not fakes:
        raise BackendInvocationError(
            f"prompt shape off: {len(reals)} reals, {len(fakes)} fakes"
        )
    return list(zip(reals[:-1], fakes)), reals[-1]


class MockPoolBackend(SlmBackend):
    """Answers with one of the prompt's own demo fakes, picked by input hash.

    Because the pick comes from the demonstrations shown, the output is
    always pool-consistent with the input under the rotating strategy.
    """

    id = "mock-pool"

    def _invoke(self, prompt: str) -> str:
        demos, input_text = parse_prompt(prompt)
        pick, _ = splitmix64(stable_seed(f"mock-pool:{input_text}"))
        return " " + demos[pick % len(demos)][1]


class MockEchoDemoBackend(SlmBackend):
    """Always answers with the first demo's fake, whatever the input is.

    Models the degenerate copying behaviour seen with fixed demonstrations.
    """

    id = "mock-echo-demo"

    def _invoke(self, prompt: str) -> str:
        demos, _ = parse_prompt(prompt)
        return " " + demos[0][1]


class CommandBackend(SlmBackend):
    """Runs a local command per call; stdout is the completion.

    The prompt reaches the command either through a literal `{prompt}`
    substitution in the argument template, or on stdin.
    """

    def __init__(
        self,
        template: str,
        *,
        prompt_via: str = "arg",
        timeout: float = DEFAULT_TIMEOUT,
        backend_id: str | None = None,
        max_inflight: int = 1,
        failure_threshold: int = DEFAULT_FAILURE_THRESHOLD,
    ) -> None:
        super().__init__(max_inflight=max_inflight, failure_threshold=failure_threshold)
        if prompt_via not in ("arg", "stdin"):
            raise ValueError(f"prompt_via must be 'arg' or 'stdin', got {prompt_via!r}")
        self._argv = shlex.split(template)
        if not self._argv:
            raise ValueError("empty command template")
        if prompt_via == "arg" and not any("{prompt}" in a for a in self._argv):
            raise ValueError("arg mode needs a {prompt} placeholder in the template")
        self._prompt_via = prompt_via
        self._timeout = timeout
        self.id = backend_id or f"command:{Path(self._argv[0]).name}"

    def _invoke(self, prompt: str) -> str:
        if self._prompt_via == "arg":
            argv = [a.replace("{prompt}", prompt) for a in self._argv]
            stdin_data = None
        else:
            argv = self._argv
            stdin_data = prompt
        try:
            proc = subprocess.run(
                argv,
                input=stdin_data,
                capture_output=True,
                text=True,
                timeout=self._timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendInvocationError(f"{self.id}: {exc}") from exc
        if proc.returncode != 0:
            detail = proc.stderr.strip().splitlines()
            raise BackendInvocationError(
                f"{self.id}: exit {proc.returncode}"
                + (f": {detail[0]}" if detail else "")
            )
        return proc.stdout


def make_backend(
    kind: str,
    *,
    command: str | None = None,
    prompt_via: str = "arg",
    timeout: float = DEFAULT_TIMEOUT,
    max_inflight: int = 1,
    failure_threshold: int = DEFAULT_FAILURE_THRESHOLD,
) -> SlmBackend:
    """Build a backend from CLI-level settings."""
    if kind == "mock-pool":
        return MockPoolBackend(
            max_inflight=max_inflight, failure_threshold=failure_threshold
        )
    if kind == "mock-echo-demo":
        return MockEchoDemoBackend(
            max_inflight=max_inflight, failure_threshold=failure_threshold
        )
    if kind == "command":
        if not command:
            raise ValueError("command backend needs a command template")
        return CommandBackend(
            command,
            prompt_via=prompt_via,
            timeout=timeout,
            max_inflight=max_inflight,
            failure_threshold=failure_threshold,
        )
    raise ValueError(f"unknown backend kind {kind!r}")
