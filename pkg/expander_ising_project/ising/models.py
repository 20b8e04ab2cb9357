from django.db import models


class RunRecord(models.Model):
    """One recorded CLI run and the manifest written next to its artifacts."""

    subcommand = models.CharField(max_length=50, db_index=True)
    graph_spec = models.CharField(max_length=500, blank=True)

    # Model parameters and run flags
    params = models.JSONField(default=dict, blank=True)
    seed = models.BigIntegerField(null=True, blank=True)
    manifest = models.JSONField(default=dict, blank=True)

    out_dir = models.CharField(max_length=1000, blank=True)
    exit_code = models.IntegerField(default=0)

    # Timestamps
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['-created_at'], name='ising_run_created_idx'),
            models.Index(fields=['subcommand', '-created_at'], name='ising_run_subcommand_idx'),
        ]

    def __str__(self):
        return f"{self.subcommand} {self.graph_spec} (exit {self.exit_code})"
