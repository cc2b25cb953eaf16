"""Comandos de la CLI; cada modulo define una clase ``Command``."""

from . import export, gradcheck, identify, simulate, validate
from .base import BaseCommand, OutputWrapper, Style

COMMANDS = {
    module.Command.name: module.Command
    for module in (validate, simulate, gradcheck, identify, export)
}

__all__ = ['BaseCommand', 'COMMANDS', 'OutputWrapper', 'Style']
