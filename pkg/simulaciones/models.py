"""
Modelos de la aplicación de simulaciones

Este archivo contiene el modelo Ejecucion, el historial de corridas del
simulador con su procedencia y resultado principal.
"""

import logging
import uuid

from django.db import DatabaseError, models
from django.utils import timezone

logger = logging.getLogger(__name__)


class Ejecucion(models.Model):
    """
    Registro de una corrida de los comandos run, compare o gradcheck
    """

    METODO_CHOICES = [
        ('dd', 'Dinámica desacoplada'),
        ('cd', 'Dinámica acoplada'),
        ('nocoding', 'Sin codificación'),
        ('oracle', 'Óptimo exacto'),
        ('compare', 'Comparación'),
        ('gradcheck', 'Chequeo de gradientes'),
    ]

    id = models.UUIDField(
        primary_key=True,
        default=uuid.uuid4,
        editable=False,
        verbose_name='ID de Ejecución'
    )

    metodo = models.CharField(
        max_length=20,
        choices=METODO_CHOICES,
        verbose_name='Método',
        help_text='Sistema simulado o comando ejecutado'
    )

    hash_escenario = models.CharField(
        max_length=64,
        verbose_name='Hash del Escenario',
        help_text='sha256 del escenario en forma canónica'
    )

    parametros = models.JSONField(
        default=dict,
        verbose_name='Parámetros',
        help_text='Parámetros efectivos de la corrida'
    )

    costo_exacto = models.FloatField(
        blank=True,
        null=True,
        verbose_name='Costo Exacto Final'
    )

    brecha_wardrop = models.FloatField(
        blank=True,
        null=True,
        verbose_name='Brecha Wardrop Final'
    )

    codigo_salida = models.PositiveSmallIntegerField(
        default=0,
        verbose_name='Código de Salida'
    )

    directorio_salida = models.CharField(
        max_length=500,
        blank=True,
        verbose_name='Directorio de Salida'
    )

    version = models.CharField(
        max_length=100,
        blank=True,
        verbose_name='Versión del Código',
        help_text='Salida de git describe al momento de la corrida'
    )

    duracion = models.FloatField(
        default=0.0,
        verbose_name='Duración (s)'
    )

    fecha_ejecucion = models.DateTimeField(
        default=timezone.now,
        verbose_name='Fecha de Ejecución'
    )

    class Meta:
        verbose_name = 'Ejecución'
        verbose_name_plural = 'Ejecuciones'
        ordering = ['-fecha_ejecucion']
        indexes = [
            models.Index(fields=['metodo', 'fecha_ejecucion'], name='simulacion_metodo_fecha_idx'),
            models.Index(fields=['hash_escenario'], name='simulacion_hash_idx'),
        ]

    def __str__(self):
        return f"{self.get_metodo_display()} - {self.hash_escenario[:12]} - {self.fecha_ejecucion.strftime('%d/%m/%Y %H:%M')}"

    @property
    def convergio(self):
        return self.codigo_salida == 0

    @classmethod
    def registrar(cls, metodo, hash_escenario, parametros, costo_exacto=None, brecha_wardrop=None,
                  codigo_salida=0, directorio_salida='', version='', duracion=0.0):
        """
        Registra una corrida. Si la base de datos no está disponible la
        corrida continúa y se devuelve None.
        """
        try:
            return cls.objects.create(
                metodo=metodo,
                hash_escenario=hash_escenario,
                parametros=parametros,
                costo_exacto=costo_exacto,
                brecha_wardrop=brecha_wardrop,
                codigo_salida=codigo_salida,
                directorio_salida=str(directorio_salida),
                version=version,
                duracion=duracion,
            )
        except DatabaseError as exc:
            logger.warning('No se pudo registrar la ejecución (%s): %s', metodo, exc)
            return None
