"""Hydrostatic transmission simulation and component sizing by tabu search
and an island-model genetic algorithm."""

__version__ = "0.1.0"
