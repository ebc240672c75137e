# Generated by Django 4.2.7 on 2026-10-18 10:12

from django.db import migrations, models
import django.utils.timezone
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Ejecucion',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False, verbose_name='ID de Ejecución')),
                ('metodo', models.CharField(choices=[('dd', 'Dinámica desacoplada'), ('cd', 'Dinámica acoplada'), ('nocoding', 'Sin codificación'), ('oracle', 'Óptimo exacto'), ('compare', 'Comparación'), ('gradcheck', 'Chequeo de gradientes')], help_text='Sistema simulado o comando ejecutado', max_length=20, verbose_name='Método')),
                ('hash_escenario', models.CharField(help_text='sha256 del escenario en forma canónica', max_length=64, verbose_name='Hash del Escenario')),
                ('parametros', models.JSONField(default=dict, help_text='Parámetros efectivos de la corrida', verbose_name='Parámetros')),
                ('costo_exacto', models.FloatField(blank=True, null=True, verbose_name='Costo Exacto Final')),
                ('brecha_wardrop', models.FloatField(blank=True, null=True, verbose_name='Brecha Wardrop Final')),
                ('codigo_salida', models.PositiveSmallIntegerField(default=0, verbose_name='Código de Salida')),
                ('directorio_salida', models.CharField(blank=True, max_length=500, verbose_name='Directorio de Salida')),
                ('version', models.CharField(blank=True, help_text='Salida de git describe al momento de la corrida', max_length=100, verbose_name='Versión del Código')),
                ('duracion', models.FloatField(default=0.0, verbose_name='Duración (s)')),
                ('fecha_ejecucion', models.DateTimeField(default=django.utils.timezone.now, verbose_name='Fecha de Ejecución')),
            ],
            options={
                'verbose_name': 'Ejecución',
                'verbose_name_plural': 'Ejecuciones',
                'ordering': ['-fecha_ejecucion'],
                'indexes': [models.Index(fields=['metodo', 'fecha_ejecucion'], name='simulacion_metodo_fecha_idx'), models.Index(fields=['hash_escenario'], name='simulacion_hash_idx')],
            },
        ),
    ]
