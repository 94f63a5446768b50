import sys
from collections.abc import Callable, Collection
from typing import Iterator, ParamSpec, TypeAlias


if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self


__all__ = [
    "Hook",
    "void",
]


void: TypeAlias = object | None
"""
Return type of a handler whose return value is ignored.
"""


P = ParamSpec("P")


class Hook(Collection[Callable[P, void]]):
    """
    Multicast callback list that progress handlers subscribe to.

    The type arguments specify the handler parameters::

        kept = Hook[int, ChainState]()
        # accepts handlers: (int, ChainState) -> void

    Handlers subscribe and unsubscribe by::

        kept += on_kept
        kept -= on_kept

    Invoking the hook calls every handler in subscription order::

        kept(i, state)

    Type Args:
        **P: Handler parameter specification.
    """

    __slots__ = ["__handlers"]

    def __init__(self, *handlers: Callable[P, void]) -> None:
        """
        Initializes a new instance of the `Hook` class.

        Args:
            *handlers ((**P) -> void): Initial handlers.
        """

        self.__handlers = [*handlers]

    def __iadd__(self, handler: Callable[P, void], /) -> Self:
        """
        Subscribes a handler.

        Returns:
            Self: This hook.
        """

        self.__handlers.append(handler)
        return self

    def __isub__(self, handler: Callable[P, void], /) -> Self:
        """
        Unsubscribes the last occurrence of a handler. Unknown handlers are ignored.

        Returns:
            Self: This hook.
        """

        for i in range(len(self.__handlers) - 1, -1, -1):
            if self.__handlers[i] == handler:
                del self.__handlers[i]
                break
        return self

    def __call__(self, *args: P.args, **kwargs: P.kwargs) -> None:
        """
        Invokes the handlers in subscription order.

        Handlers subscribed or unsubscribed during the call take effect from the next call.
        """

        for handler in [*self.__handlers]:
            handler(*args, **kwargs)

    def __bool__(self) -> bool:
        return bool(self.__handlers)

    def __contains__(self, x: object, /) -> bool:
        return x in self.__handlers

    def __iter__(self) -> Iterator[Callable[P, void]]:
        yield from self.__handlers

    def __len__(self) -> int:
        return len(self.__handlers)
