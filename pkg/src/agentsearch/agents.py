"""Role-conditioned agent calls."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .actions import ActionRegistry
from .backends.base import ChatMessage, ChatRequest, ChatResponse, Part, user
from .backends.gateway import Gateway
from .roles import RoleRegistry
from .scoring import ProbsFallback


@dataclass
class AgentContext:
    """Everything an agent call needs: the gateway and the two registries."""

    gateway: Gateway
    roles: RoleRegistry
    actions: ActionRegistry = field(default_factory=ActionRegistry)
    probs_fallback: ProbsFallback = field(default_factory=ProbsFallback)
    temperature: float = 0.0

    @property
    def tracer(self):
        return self.gateway.tracer

    def ask(self, role: str, parts: Sequence[Part], *, want_token_probs: bool = False,
            retry_of: tuple[str, str] | None = None) -> ChatResponse:
        """Send one user turn to ``role``.

        ``retry_of`` is ``(previous reply, reminder)``: the failed reply is
        replayed as an assistant turn followed by the reminder.
        """
        messages: list[ChatMessage] = [user(*parts)]
        if retry_of is not None:
            previous, reminder = retry_of
            messages.append(ChatMessage("assistant", (previous,)))
            messages.append(user(reminder))
        request = ChatRequest(
            role=role,
            system_role=self.roles.prompt(role),
            messages=tuple(messages),
            want_token_probs=want_token_probs,
            temperature=self.temperature,
        )
        return self.gateway.chat(request)
