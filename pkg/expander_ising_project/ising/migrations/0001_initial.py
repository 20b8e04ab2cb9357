# Generated by Django 5.2.8 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('subcommand', models.CharField(db_index=True, max_length=50)),
                ('graph_spec', models.CharField(blank=True, max_length=500)),
                ('params', models.JSONField(blank=True, default=dict)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('manifest', models.JSONField(blank=True, default=dict)),
                ('out_dir', models.CharField(blank=True, max_length=1000)),
                ('exit_code', models.IntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['-created_at'], name='ising_run_created_idx'), models.Index(fields=['subcommand', '-created_at'], name='ising_run_subcommand_idx')],
            },
        ),
    ]
