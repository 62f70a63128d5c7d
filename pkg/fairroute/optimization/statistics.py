"""Statistics tracking for the genetic optimizer"""

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..errors import WritingError

TRACE_COLUMNS = [
    'epoch', 'generation', 'best_score', 'utility', 'provider_fairness', 'customer_fairness',
]


@dataclass
class GenerationRecord:
    """Best chromosome of one generation"""

    epoch: int
    generation: int
    best_score: float
    utility: float
    provider_fairness: float
    customer_fairness: float

    def as_row(self) -> List[Any]:
        return [
            self.epoch, self.generation, f"{self.best_score:.6f}", f"{self.utility:.6f}",
            f"{self.provider_fairness:.6f}", f"{self.customer_fairness:.6f}",
        ]


@dataclass
class GAStatistics:
    """Statistics collected during one optimizer run"""

    epoch: int = 0
    population_size: int = 0
    genome_length: int = 0

    generations: List[GenerationRecord] = field(default_factory=list)

    crossovers: int = 0
    local_optimizations: int = 0
    mutations: int = 0
    fairness_moves: int = 0
    evaluations: int = 0

    # Performance metrics
    processing_time: float = 0.0
    start_time: Optional[float] = None

    def start_timing(self) -> None:
        """Start timing the optimization process"""
        self.start_time = time.time()

    def stop_timing(self) -> None:
        """Stop timing and calculate processing time"""
        if self.start_time is not None:
            self.processing_time = time.time() - self.start_time

    def record_generation(
        self,
        generation: int,
        best_score: float,
        utility: float,
        provider_fairness: float,
        customer_fairness: float
    ) -> None:
        self.generations.append(GenerationRecord(
            epoch=self.epoch,
            generation=generation,
            best_score=best_score,
            utility=utility,
            provider_fairness=provider_fairness,
            customer_fairness=customer_fairness,
        ))

    @property
    def best_scores(self) -> List[float]:
        return [record.best_score for record in self.generations]

    @property
    def improvement(self) -> float:
        """Gain of the best score between the first and last generation"""
        if len(self.generations) < 2:
            return 0.0
        return self.generations[-1].best_score - self.generations[0].best_score

    def get_summary(self) -> Dict[str, Any]:
        """Get summary statistics as dictionary"""
        last = self.generations[-1] if self.generations else None
        return {
            'epoch': self.epoch,
            'generations': len(self.generations),
            'population_size': self.population_size,
            'genome_length': self.genome_length,
            'processing_time': round(self.processing_time, 3),
            'best_score': round(last.best_score, 6) if last else None,
            'improvement': round(self.improvement, 6),
            'crossovers': self.crossovers,
            'local_optimizations': self.local_optimizations,
            'mutations': self.mutations,
            'fairness_moves': self.fairness_moves,
            'evaluations': self.evaluations,
        }

    def save_trace(self, path: Union[str, Path]) -> None:
        """Append the per-generation records to a CSV, writing the header once

        Raises:
            WritingError: If the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            new_file = not path.exists() or path.stat().st_size == 0
            with open(path, 'a', encoding='utf-8', newline='') as f:
                writer = csv.writer(f)
                if new_file:
                    writer.writerow(TRACE_COLUMNS)
                for record in self.generations:
                    writer.writerow(record.as_row())
        except OSError as e:
            raise WritingError(f"Failed to write GA trace {path}: {e}") from e

    def __str__(self) -> str:
        """Human-readable string representation"""
        last = self.generations[-1] if self.generations else None
        lines = [
            f"GA Statistics (epoch {self.epoch}):",
            f"  Population: {self.population_size:,}  Genome Length: {self.genome_length:,}",
            f"  Generations: {len(self.generations):,}",
            f"  Processing Time: {self.processing_time:.2f}s",
            f"  Best Score: {last.best_score:.6f}" if last else "  Best Score: n/a",
            f"  Improvement: {self.improvement:+.6f}",
            f"  Crossovers: {self.crossovers:,}  Local Optimizations: {self.local_optimizations:,}",
            f"  Mutations: {self.mutations:,}  Fairness Moves: {self.fairness_moves:,}",
        ]
        return '\n'.join(lines)
